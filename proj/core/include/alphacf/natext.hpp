#pragma once

// Natural extension of T_alpha for alpha = 1/r (r >= 3) and for
// sqrt(2) - 1 <= alpha <= 1/2: the domain D as vertical strips minus
// excluded y-sets, the map
//
//   Tbar(x, y) = (T_alpha(x), 1 / (k(x) + sign(x) y)),
//
// sampling of the invariant density K(x, y) = 1 / (C (1 + x y)^2), and the
// checks of invariance, injectivity and B+ / (1 - B-) complementarity.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alphacf/interval.hpp"
#include "alphacf/maps.hpp"
#include "alphacf/parallel.hpp"

namespace alphacf {

struct BetaXi {
  double beta;
  double xi;
};

/// beta = fixed point of V_{r+1}, xi = 1 / (r - beta).
BetaXi beta_xi(int r);

/// B^+, B^-, B^i truncated at `depth` tokens. `excluded` holds the images
/// found so far, `unexplored` the ranges of subtrees that were not expanded.
/// Neither is clipped to a strip.
struct TruncatedSet {
  IntervalSet excluded;
  IntervalSet unexplored;
  std::size_t sequences = 0;
  std::size_t pruned = 0;
};

struct BSets {
  int r = 0;
  int depth = 0;
  double min_width = 0.0;
  TruncatedSet plus;
  TruncatedSet minus;
  std::vector<TruncatedSet> inner;  // inner[i - 2] is B^i, i = 2..r-1
};

inline constexpr double kDefaultMinWidth = 1e-7;

/// Subtrees whose reachable y-range is narrower than min_width are cut off
/// and recorded as unexplored.
BSets build_B_sets(int r, int depth, double min_width = kDefaultMinWidth);

/// One vertical strip: x-range times (y-range minus excluded).
struct Strip {
  std::string label;
  Interval x;
  Interval y;
  IntervalSet excluded;    // clipped to y
  IntervalSet unexplored;  // clipped to y, disjoint from excluded
};

struct NatExtDomain {
  double alpha = 0.0;
  int r = 0;  // 0 for the alpha in [sqrt 2 - 1, 1/2] domain
  int depth = 0;
  double beta = 0.0;
  double xi = 0.0;
  std::vector<Strip> strips;
  /// Integral of (1 + x y)^-2 over D.
  double C_alpha = 0.0;
  /// Same integral over the unexplored pieces (bound on the truncation error).
  double C_unexplored = 0.0;
};

NatExtDomain build_domain(int r, int depth, double min_width = kDefaultMinWidth);
NatExtDomain prop1_domain(double alpha);

struct NatExtPoint {
  double x;
  double y;
};

enum class Membership { Outside, Inside, Uncertain };

/// Uncertain: within tol of a boundary, or inside an unexplored piece.
Membership classify(const NatExtDomain& d, NatExtPoint p, double tol = 1e-12);
/// Boundary-tolerant membership: uncertain counts as inside.
bool contains(const NatExtDomain& d, NatExtPoint p, double tol = 1e-12);

NatExtPoint tbar(const AlphaContext& ctx, NatExtPoint p);
NatExtPoint prop1_natext(double alpha, NatExtPoint p);

/// |det D Tbar| = 1 / (x^2 (k + sign(x) y)^2).
double tbar_jacobian(const AlphaContext& ctx, NatExtPoint p);

/// Unnormalized density (1 + x y)^-2.
inline double k_weight(NatExtPoint p) {
  const double s = 1.0 + p.x * p.y;
  return 1.0 / (s * s);
}

struct KSample {
  std::vector<NatExtPoint> points;
  std::uint64_t proposals = 0;
  double acceptance() const {
    return proposals ? static_cast<double>(points.size()) / static_cast<double>(proposals) : 0.0;
  }
};

/// Rejection sampling of K restricted to the points classified Inside.
/// Throws Error(RejectionStarvation) below 1% acceptance.
KSample sample_K(const NatExtDomain& d, std::size_t count, std::uint64_t seed,
                 Parallelism par = {});

struct InvarianceReport {
  double distance;   // L1 between histograms of Tbar(sample) and a fresh sample
  double threshold;  // null mean + 5 null standard deviations
  double null_mean;
  double null_sd;
  std::size_t outside;  // images failing contains()
  bool ok() const { return distance <= threshold && outside == 0; }
};

InvarianceReport check_invariance(const NatExtDomain& d, std::size_t count, int bins,
                                  std::uint64_t seed, Parallelism par = {});

struct InjectivityReport {
  /// Points whose image has a second preimage classified Inside.
  std::size_t analytic_collisions;
  /// Image pairs closer than 1e-9 with preimages more than 1e-6 apart.
  std::size_t pair_collisions;
  std::size_t checked;
  std::size_t collisions() const { return analytic_collisions + pair_collisions; }
};

InjectivityReport check_injectivity(const NatExtDomain& d, std::size_t count, std::uint64_t seed,
                                    Parallelism par = {});

struct Complementarity {
  double overlap_measure;
  double covered_measure;
  double target;
};

/// B^+ and 1 - B^- inside [xi, 1 - beta].
Complementarity complementarity_check(int r, int depth, double min_width = kDefaultMinWidth);
Complementarity complementarity_check(const BSets& b);

std::string domain_summary_json(const NatExtDomain& d);
std::string interval_set_json(const IntervalSet& s);

}  // namespace alphacf
