#pragma once

// Invariant densities of T_alpha: Ulam discretization of the transfer
// operator, the closed forms for alpha >= sqrt(2) - 1, and the series for
// alpha = 1/r obtained by integrating the natural-extension density over
// vertical sections.

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "alphacf/interval.hpp"
#include "alphacf/maps.hpp"
#include "alphacf/parallel.hpp"

namespace alphacf {

struct PiecewiseConstantDensity {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> weights;  // density value on each bin
  std::size_t iterations = 0;
  double last_change = 0.0;  // L1 change of the final power step
  bool converged = false;

  std::size_t bin_count() const noexcept { return weights.size(); }
  double bin_width() const noexcept { return (hi - lo) / static_cast<double>(weights.size()); }
  double operator()(double x) const noexcept;
};

/// coef / (x + shift)
struct FractionalTerm {
  double coef;
  double shift;
};

struct FractionalSegment {
  Interval range;
  std::vector<FractionalTerm> terms;
  /// Chebyshev coefficients of the term sum on `range`, used instead of the
  /// terms when there are many of them.
  std::vector<double> cheb;

  double raw(double x) const noexcept;
};

struct PiecewiseFractionalDensity {
  std::vector<FractionalSegment> segments;  // sorted, tiling [alpha - 1, alpha]
  double norm_constant = 1.0;               // density = sum of terms / norm_constant
  std::string regime;

  double operator()(double x) const noexcept;
  std::vector<double> breakpoints() const;
};

using Density = std::variant<PiecewiseConstantDensity, PiecewiseFractionalDensity>;

struct UlamOptions {
  std::size_t bins = 4096;
  std::size_t max_iters = 10000;
  double tol = 1e-10;
  Parallelism par{};
};

/// Row-stochastic Ulam matrix in CSR form; row k holds the fractions of bin
/// k that T_alpha sends into each bin.
struct UlamMatrix {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t bins = 0;
  std::vector<std::size_t> row_start;
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  /// mass -> mass P
  std::vector<double> push(const std::vector<double>& mass) const;
};

UlamMatrix ulam_matrix(const AlphaContext& ctx, std::size_t bins, Parallelism par = {});

/// Power iteration from the uniform density until the L1 change drops below
/// tol. Does not throw on non-convergence; check `converged`.
PiecewiseConstantDensity ulam_density(const AlphaContext& ctx, const UlamOptions& opt = {});

enum class ClosedFormRegime {
  Auto,
  Gauss,   // g < alpha <= 1
  Golden,  // 1/2 < alpha <= g
  Prop1,   // sqrt(2) - 1 <= alpha <= 1/2
};

/// Closed forms for sqrt(2) - 1 <= alpha <= 1. Throws UnsupportedAlpha below.
PiecewiseFractionalDensity closed_form_density(double alpha);
/// A forced regime also accepts the closed endpoints of its range.
PiecewiseFractionalDensity closed_form_density(double alpha, ClosedFormRegime regime);

inline constexpr double kSeriesMinWidth = 1e-9;

/// Density for alpha = 1/r: on each strip the term for the full y-range
/// minus one pair of terms per excluded interval found up to trunc_depth.
PiecewiseFractionalDensity series_density_one_over_r(int r, int trunc_depth,
                                                     double min_width = kSeriesMinWidth);

double eval_density(const Density& d, double x);
/// Exact for bins and terms.
double integral(const Density& d);
double integral(const Density& d, double a, double b);
std::vector<double> breakpoints(const Density& d);

/// L1 distance by Gauss-Legendre panels between consecutive breakpoints of
/// either density (and 0), quad_points nodes per panel.
double l1_distance(const Density& a, const Density& b, int quad_points = 8);

/// 2 * integral of -log|x| rho(x) dx.
double rohlin_entropy(const Density& d);

/// `x,rho` rows at `points` uniformly spaced interior points.
std::string density_csv(const Density& d, std::size_t points);
std::string density_json(const Density& d, std::size_t max_terms = 64);

}  // namespace alphacf
