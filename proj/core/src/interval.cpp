#include "alphacf/interval.hpp"

#include <iterator>
#include <numeric>

namespace alphacf {

IntervalSet IntervalSet::from_unsorted(std::vector<Interval> pieces, double merge_tol) {
  std::erase_if(pieces, [](const Interval& iv) { return !(iv.hi > iv.lo); });
  std::sort(pieces.begin(), pieces.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  IntervalSet out;
  out.merge_tol_ = merge_tol;
  for (const auto& iv : pieces) {
    if (!out.intervals_.empty() && iv.lo <= out.intervals_.back().hi + merge_tol) {
      out.intervals_.back().hi = std::max(out.intervals_.back().hi, iv.hi);
    } else {
      out.intervals_.push_back(iv);
    }
  }
  return out;
}

double IntervalSet::measure() const noexcept {
  return std::accumulate(intervals_.begin(), intervals_.end(), 0.0,
                         [](double acc, const Interval& iv) { return acc + iv.width(); });
}

bool IntervalSet::contains(double x, double tol) const noexcept {
  // first interval with lo > x + tol; the candidate is the one before it
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x + tol,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  if (it == intervals_.begin()) return false;
  return std::prev(it)->hi + tol >= x;
}

bool IntervalSet::contains_interior(double x, double tol) const noexcept {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  if (it == intervals_.begin()) return false;
  const auto& iv = *std::prev(it);
  return x > iv.lo + tol && x < iv.hi - tol;
}

IntervalSet IntervalSet::reflected() const {
  std::vector<Interval> pieces;
  pieces.reserve(intervals_.size());
  for (auto it = intervals_.rbegin(); it != intervals_.rend(); ++it) {
    pieces.push_back({1.0 - it->hi, 1.0 - it->lo});
  }
  return from_unsorted(std::move(pieces), merge_tol_);
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  std::vector<Interval> pieces;
  std::size_t i = 0;
  std::size_t j = 0;
  const auto& a = intervals_;
  const auto& b = other.intervals_;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].lo, b[j].lo);
    const double hi = std::min(a[i].hi, b[j].hi);
    if (hi > lo) pieces.push_back({lo, hi});
    if (a[i].hi < b[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return from_unsorted(std::move(pieces), 0.0);
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  std::vector<Interval> pieces = intervals_;
  pieces.insert(pieces.end(), other.intervals_.begin(), other.intervals_.end());
  return from_unsorted(std::move(pieces), std::max(merge_tol_, other.merge_tol_));
}

bool IntervalSet::is_subset_of(const Interval& range, double tol) const noexcept {
  if (intervals_.empty()) return true;
  return intervals_.front().lo >= range.lo - tol && intervals_.back().hi <= range.hi + tol;
}

}  // namespace alphacf
