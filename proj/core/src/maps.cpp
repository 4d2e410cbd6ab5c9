#include "alphacf/maps.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <string>

#include "alphacf/error.hpp"

namespace alphacf {

namespace {

constexpr double kEmptyWidth = 1e-14;

std::string num(double v) { return fmt::format("{}", v); }

constexpr double kMaxDigit = 2147483647.0;

void require_nonzero(double x, const char* where) {
  if (x == 0.0) throw Error(ErrorCode::ZeroArgument, std::string(where) + " at x = 0");
  if (std::abs(1.0 / x) >= kMaxDigit) {
    throw Error(ErrorCode::ZeroArgument, std::string(where) + ": digit of x = " + num(x) + " exceeds the int range");
  }
}

int compute_r_digits(double alpha) {
  // v_r > alpha  <=>  r < 1 / (alpha^2 + alpha)
  const double bound = 1.0 / (alpha * alpha + alpha);
  int r = std::max(0, static_cast<int>(std::ceil(bound)) - 1);
  while (r >= 1 && !(alpha < v_sequence(r))) --r;
  while (alpha < v_sequence(r + 1)) ++r;
  return r;
}

}  // namespace

AlphaContext::AlphaContext(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::OutOfDomain, "alpha must lie in [0, 1], got " + num(alpha));
  }
  if (alpha > 0.0) {
    const double inv = std::round(1.0 / alpha);
    if (inv <= static_cast<double>(std::numeric_limits<int>::max()) &&
        std::abs(alpha - 1.0 / inv) <= 1e-14) {
      one_over_r_ = static_cast<int>(inv);
      alpha_ = 1.0 / inv;
    }
    j_min_ = static_cast<int>(std::floor(1.0 / alpha_ + 1.0 - alpha_));
    r_digits_ = compute_r_digits(alpha_);
  }
}

AlphaContext AlphaContext::one_over(int r) {
  if (r < 1) throw Error(ErrorCode::OutOfDomain, "r must be positive");
  return AlphaContext(1.0 / r);
}

int AlphaContext::j_min() const {
  if (alpha_ == 0.0) throw Error(ErrorCode::UnsupportedAlpha, "j_min is undefined for alpha = 0");
  return j_min_;
}

int AlphaContext::r_digits() const {
  if (alpha_ == 0.0) throw Error(ErrorCode::UnsupportedAlpha, "r_digits is unbounded for alpha = 0");
  return r_digits_;
}

Digit digit_of(double alpha, double x) noexcept {
  const double u = std::min(std::abs(1.0 / x), kMaxDigit);
  return {static_cast<int>(std::floor(u + 1.0 - alpha)), x > 0.0 ? Sign::Plus : Sign::Minus};
}

Step t_alpha(const AlphaContext& ctx, double x) {
  require_nonzero(x, "t_alpha");
  if (!ctx.contains(x)) {
    throw Error(ErrorCode::OutOfDomain, "t_alpha: x = " + num(x) + " outside I_alpha");
  }
  const double u = std::abs(1.0 / x);
  const double k = std::floor(u + 1.0 - ctx.alpha());
  return {u - k, {static_cast<int>(k), x > 0.0 ? Sign::Plus : Sign::Minus}};
}

double m_alpha(const AlphaContext& ctx, double x) {
  require_nonzero(x, "m_alpha");
  const double top = std::max(ctx.alpha(), 1.0 - ctx.alpha());
  if (x < -kDomainTol || x > top + kDomainTol) {
    throw Error(ErrorCode::OutOfDomain, "m_alpha: x = " + num(x));
  }
  const double u = 1.0 / x;
  return std::abs(u - std::floor(u + 1.0 - ctx.alpha()));
}

Step m_zero(double x) {
  require_nonzero(x, "m_zero");
  if (x < 0.0 || x > 1.0 + kDomainTol) {
    throw Error(ErrorCode::OutOfDomain, "m_zero: x = " + num(x) + " outside (0, 1]");
  }
  const double u = 1.0 / x;
  const double a = std::floor(u) + 1.0;
  return {a - u, {static_cast<int>(a), Sign::Plus}};
}

double v_sequence(int r) {
  if (r < 0) throw Error(ErrorCode::OutOfDomain, "v_sequence: r must be >= 0");
  if (r == 0) return std::numeric_limits<double>::infinity();
  return -0.5 + 0.5 * std::sqrt(1.0 + 4.0 / r);
}

std::vector<double> c_points(const AlphaContext& ctx) {
  if (!(ctx.alpha() > 0.0 && ctx.alpha() < 1.0)) {
    throw Error(ErrorCode::OutOfDomain, "c_points needs alpha in (0, 1)");
  }
  const int r = ctx.r_digits();
  std::vector<double> c;
  c.reserve(static_cast<std::size_t>(r) + 2);
  c.push_back(ctx.alpha());
  for (int j = 1; j <= r; ++j) c.push_back(-1.0 + 1.0 / (j + 1.0 / (1.0 + ctx.alpha())));
  c.push_back(ctx.alpha() - 1.0);
  return c;
}

Jump jump_map(const AlphaContext& ctx, double x) {
  if (!(ctx.alpha() > 0.0 && ctx.alpha() <= kSqrt2Minus1 + 1e-15)) {
    throw Error(ErrorCode::UnsupportedAlpha, "jump_map needs alpha in (0, sqrt(2) - 1]");
  }
  if (!ctx.contains(x)) throw Error(ErrorCode::OutOfDomain, "jump_map: x = " + num(x));
  const auto c = c_points(ctx);
  const int r = static_cast<int>(c.size()) - 2;
  for (int j = 1; j <= r; ++j) {
    if (std::abs(x - c[j]) <= kDomainTol) {
      throw Error(ErrorCode::Breakpoint, "jump_map: x = " + num(x) + " is c_" + std::to_string(j));
    }
  }
  // c is decreasing: L_0 = [c_1, alpha], L_j = [c_{j+1}, c_j)
  int j = 0;
  while (j < r && x < c[j + 1]) ++j;
  double y = x;
  for (int i = 0; i <= j; ++i) y = t_alpha(ctx, y).value;
  return {y, j + 1};
}

double inverse_branch_m0(int a, double y) {
  if (!(y < a)) throw Error(ErrorCode::OutOfDomain, "inverse_branch_m0 needs y < a");
  return 1.0 / (a - y);
}

std::optional<Interval> rank_one_cylinder(const AlphaContext& ctx, Digit d) {
  if (d.j < 1) return std::nullopt;
  const double a = ctx.alpha();
  Interval iv;
  if (d.sign == Sign::Plus) {
    iv.lo = 1.0 / (d.j + a);
    iv.hi = (d.j - 1 + a) > 0.0 ? std::min(1.0 / (d.j - 1 + a), a) : a;
  } else {
    iv.lo = std::max(-1.0 / (d.j - 1 + a), a - 1.0);
    iv.hi = -1.0 / (d.j + a);
  }
  if (iv.width() < kEmptyWidth) return std::nullopt;
  return iv;
}

double inverse_branch_t(const AlphaContext& ctx, Digit d, double y) {
  const auto cyl = rank_one_cylinder(ctx, d);
  if (!cyl) {
    throw Error(ErrorCode::EmptyCylinder,
                "digit (" + std::to_string(d.j) + ", " + (d.sign == Sign::Plus ? "+" : "-") +
                    ") is empty for alpha = " + num(ctx.alpha()));
  }
  if (!ctx.contains(y)) throw Error(ErrorCode::OutOfDomain, "inverse_branch_t: y = " + num(y));
  const double x = sign_value(d.sign) / (d.j + y);
  if (!cyl->contains(x, kDomainTol)) {
    throw Error(ErrorCode::OutOfDomain,
                "inverse_branch_t: y = " + num(y) + " is not in the image of the cylinder");
  }
  return x;
}

double derivative_abs(const AlphaContext& /*ctx*/, double x) {
  require_nonzero(x, "derivative_abs");
  return 1.0 / (x * x);
}

double translated_map(const AlphaContext& ctx_bar, double alpha, double x) {
  if (!ctx_bar.contains(x)) throw Error(ErrorCode::OutOfDomain, "translated_map: x = " + num(x));
  const AlphaContext ctx(alpha);
  const double shift = ctx_bar.alpha() - alpha;
  const double u = x - shift;
  require_nonzero(u, "translated_map");
  return t_alpha(ctx, u).value + shift;
}

OrbitRecord orbit(const AlphaContext& ctx, double x0, std::size_t n) {
  OrbitRecord rec;
  rec.points.reserve(n);
  rec.digits.reserve(n);
  double x = x0;
  for (std::size_t i = 0; i < n; ++i) {
    if (x == 0.0 || std::abs(1.0 / x) >= kMaxDigit) {
      rec.escaped_zero = true;
      rec.stop_point = x;
      break;
    }
    const Step s = t_alpha(ctx, x);
    rec.points.push_back(x);
    rec.digits.push_back(s.digit);
    x = s.value;
  }
  return rec;
}

int r_digits_from_orbit(const AlphaContext& ctx) {
  if (ctx.alpha() == 0.0) {
    throw Error(ErrorCode::UnsupportedAlpha, "the orbit of -1 never leaves (2, -) for alpha = 0");
  }
  const auto cyl = rank_one_cylinder(ctx, {2, Sign::Minus});
  if (!cyl) return 0;
  double x = ctx.lo();
  int count = 0;
  while (x != 0.0 && x >= cyl->lo && x < cyl->hi) {
    ++count;
    x = t_alpha(ctx, x).value;
  }
  return count;
}

}  // namespace alphacf
