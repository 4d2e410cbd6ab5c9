#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace alphacf {

/// Closed interval [lo, hi]; open/closed ends are not tracked numerically.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  bool contains(double x, double tol = 0.0) const noexcept {
    return x >= lo - tol && x <= hi + tol;
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, pairwise-disjoint union of intervals. Immutable once built.
class IntervalSet {
 public:
  IntervalSet() = default;

  /// Sorts and merges; pieces closer than merge_tol are fused.
  static IntervalSet from_unsorted(std::vector<Interval> pieces, double merge_tol = 0.0);

  const std::vector<Interval>& intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return intervals_.size(); }
  bool empty() const noexcept { return intervals_.empty(); }
  double measure() const noexcept;
  double merge_tol() const noexcept { return merge_tol_; }

  /// True if x lies in some interval, widened by tol on both sides.
  bool contains(double x, double tol = 0.0) const noexcept;
  /// True if x lies in some interval shrunk by tol on both sides.
  bool contains_interior(double x, double tol) const noexcept;

  /// {1 - y : y in this}.
  IntervalSet reflected() const;
  IntervalSet intersect(const IntervalSet& other) const;
  IntervalSet unite(const IntervalSet& other) const;
  bool is_subset_of(const Interval& range, double tol = 0.0) const noexcept;

 private:
  std::vector<Interval> intervals_;
  double merge_tol_ = 0.0;
};

}  // namespace alphacf
