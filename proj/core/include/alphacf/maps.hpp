#pragma once

// The alpha-continued-fraction maps
//
//   T_a(x) = |1/x| - floor(|1/x| + 1 - a),   x in I_a = [a - 1, a],
//
// their folded version M_a on [0, max(a, 1 - a)], the by-excess map
// M_0(x) = -1/x + floor(1/x + 1) on (0, 1], inverse branches, the
// translated maps used to compare different parameters on one interval, and
// the jump transformation that collapses runs of the digit (2, -).

#include <cstddef>
#include <optional>
#include <vector>

#include "alphacf/interval.hpp"

namespace alphacf {

inline constexpr double kGolden = 0.61803398874989484820;      // (sqrt 5 - 1) / 2
inline constexpr double kGoldenBig = 1.61803398874989484820;   // (sqrt 5 + 1) / 2
inline constexpr double kSqrt2Minus1 = 0.41421356237309504880;
inline constexpr double kDomainTol = 1e-12;

enum class Sign : int { Minus = -1, Plus = 1 };

constexpr int sign_value(Sign s) noexcept { return static_cast<int>(s); }

/// Label (j, sign) of a rank-one cylinder: the branch x -> sign/x - j.
struct Digit {
  int j = 0;
  Sign sign = Sign::Plus;
  friend bool operator==(const Digit&, const Digit&) = default;
};

using DigitSeq = std::vector<Digit>;

/// Parameter alpha together with the constants derived from it.
class AlphaContext {
 public:
  /// Accepts alpha in [0, 1]; snaps to 1/r when within 1e-14 of it.
  explicit AlphaContext(double alpha);
  static AlphaContext one_over(int r);

  double alpha() const noexcept { return alpha_; }
  double lo() const noexcept { return alpha_ - 1.0; }
  double hi() const noexcept { return alpha_; }
  Interval interval() const noexcept { return {lo(), hi()}; }

  /// Smallest positive digit, floor(1/alpha + 1 - alpha). Throws for alpha = 0.
  int j_min() const;
  /// The index r with v_{r+1} <= alpha < v_r (0 when alpha >= g): the number
  /// of leading (2, -) digits of alpha - 1. Throws for alpha = 0.
  int r_digits() const;
  /// r when alpha = 1/r exactly.
  std::optional<int> one_over_r() const noexcept { return one_over_r_; }

  bool contains(double x, double tol = kDomainTol) const noexcept {
    return x >= lo() - tol && x <= hi() + tol;
  }

 private:
  double alpha_;
  int j_min_ = 0;
  int r_digits_ = 0;
  std::optional<int> one_over_r_;
};

struct Step {
  double value;
  Digit digit;
};

/// One application of T_alpha; also reports the branch taken. Throws
/// ZeroArgument at 0 and where the digit would not fit in an int.
Step t_alpha(const AlphaContext& ctx, double x);

/// k(x) = floor(|1/x| + 1 - alpha) with the sign of x; no domain check.
/// Saturates at INT_MAX near 0.
Digit digit_of(double alpha, double x) noexcept;

double m_alpha(const AlphaContext& ctx, double x);

/// By-excess map; the digit is floor(1/x) + 1 >= 2 and the image is in (0, 1].
Step m_zero(double x);

/// v_r = (-1 + sqrt(1 + 4/r)) / 2.
double v_sequence(int r);

/// Points c_0 = alpha > c_1 > ... > c_{r+1} = alpha - 1 bounding the
/// partition into runs of (2, -) digits.
std::vector<double> c_points(const AlphaContext& ctx);

struct Jump {
  double value;
  int tau;
};

/// G_alpha(x) = T_alpha^{j+1}(x) for x in L_j = [c_{j+1}, c_j).
Jump jump_map(const AlphaContext& ctx, double x);

/// V_a(y) = 1 / (a - y).
double inverse_branch_m0(int a, double y);

/// Rank-one cylinder I_j^sign clipped to I_alpha, or nullopt if empty.
std::optional<Interval> rank_one_cylinder(const AlphaContext& ctx, Digit d);

/// The preimage of y inside the cylinder of digit d: sign / (j + y).
double inverse_branch_t(const AlphaContext& ctx, Digit d, double y);

/// |T_alpha'(x)| = 1/x^2.
double derivative_abs(const AlphaContext& ctx, double x);

/// A_{alpha, alpha_bar} = tau o T_alpha o tau^{-1}, tau the shift by
/// alpha_bar - alpha; acts on [alpha_bar - 1, alpha_bar].
double translated_map(const AlphaContext& ctx_bar, double alpha, double x);

struct OrbitRecord {
  std::vector<double> points;
  DigitSeq digits;
  bool escaped_zero = false;
  double stop_point = 0.0;  // the iterate at which escaped_zero was set
};

/// Records x0 and n-1 further iterates (n points, n digits). Stops early and
/// sets escaped_zero if an iterate is 0 or so close to 0 that its digit does
/// not fit in an int.
OrbitRecord orbit(const AlphaContext& ctx, double x0, std::size_t n);

/// Counts the leading (2, -) digits of the orbit of alpha - 1.
int r_digits_from_orbit(const AlphaContext& ctx);

}  // namespace alphacf
