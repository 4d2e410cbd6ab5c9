#include "alphacf/density.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <type_traits>

#include "alphacf/error.hpp"
#include "alphacf/natext.hpp"

namespace alphacf {

namespace {

constexpr std::size_t kChebDegree = 64;
constexpr std::size_t kChebThreshold = 64;

double clenshaw(const std::vector<double>& c, double t) {
  double b1 = 0.0;
  double b2 = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) {
    const double b0 = 2.0 * t * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + c[0];
}

double term_sum(const std::vector<FractionalTerm>& terms, double x) {
  double s = 0.0;
  for (const auto& t : terms) s += t.coef / (x + t.shift);
  return s;
}

void fit_chebyshev(FractionalSegment& seg) {
  const std::size_t n = kChebDegree;
  const double mid = 0.5 * (seg.range.lo + seg.range.hi);
  const double half = 0.5 * seg.range.width();
  std::vector<double> f(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = std::cos(M_PI * (k + 0.5) / n);
    f[k] = term_sum(seg.terms, mid + half * t);
  }
  seg.cheb.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += f[k] * std::cos(M_PI * j * (k + 0.5) / n);
    seg.cheb[j] = 2.0 * s / n;
  }
  seg.cheb[0] *= 0.5;
}

// Integral of sum coef / (x + shift) over [a, b].
double term_integral(const std::vector<FractionalTerm>& terms, double a, double b) {
  double s = 0.0;
  for (const auto& t : terms) s += t.coef * std::log((b + t.shift) / (a + t.shift));
  return s;
}

// Integral of -log t over [0, t].
double neg_log_primitive(double t) { return t > 0.0 ? t - t * std::log(t) : 0.0; }

// Integral of -2 log|x| over [a, b].
double rohlin_weight(double a, double b) {
  if (a >= 0.0) return 2.0 * (neg_log_primitive(b) - neg_log_primitive(a));
  if (b <= 0.0) return 2.0 * (neg_log_primitive(-a) - neg_log_primitive(-b));
  return 2.0 * (neg_log_primitive(-a) + neg_log_primitive(b));
}

}  // namespace

double PiecewiseConstantDensity::operator()(double x) const noexcept {
  if (x < lo || x > hi || weights.empty()) return 0.0;
  const auto n = static_cast<std::ptrdiff_t>(weights.size());
  const auto k = std::clamp(static_cast<std::ptrdiff_t>((x - lo) / bin_width()), std::ptrdiff_t{0}, n - 1);
  return weights[static_cast<std::size_t>(k)];
}

double FractionalSegment::raw(double x) const noexcept {
  if (!cheb.empty()) {
    const double t = (2.0 * x - range.lo - range.hi) / range.width();
    return clenshaw(cheb, std::clamp(t, -1.0, 1.0));
  }
  return term_sum(terms, x);
}

double PiecewiseFractionalDensity::operator()(double x) const noexcept {
  if (segments.empty() || x < segments.front().range.lo || x > segments.back().range.hi) return 0.0;
  auto it = std::upper_bound(segments.begin(), segments.end(), x,
                             [](double v, const FractionalSegment& s) { return v < s.range.lo; });
  if (it != segments.begin()) --it;
  return it->raw(x) / norm_constant;
}

std::vector<double> PiecewiseFractionalDensity::breakpoints() const {
  std::vector<double> b;
  for (const auto& s : segments) {
    b.push_back(s.range.lo);
    b.push_back(s.range.hi);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

std::vector<double> UlamMatrix::push(const std::vector<double>& mass) const {
  std::vector<double> out(bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    const double m = mass[k];
    if (m == 0.0) continue;
    for (std::size_t e = row_start[k]; e < row_start[k + 1]; ++e) out[col[e]] += m * val[e];
  }
  return out;
}

namespace {

// Adds the T_alpha-images of {x : |x| in [u0, u1]} on one side of 0 to a
// dense row. On that side the cylinder of digit j is |x| in (1/(j+a), 1/(j-1+a)]
// clipped to |x| <= cap, and y = 1/|x| - j.
void add_side(double alpha, double u0, double u1, double cap, int j_floor, double lo,
              double width, std::vector<double>& row) {
  const std::size_t n = row.size();
  const double h = width / static_cast<double>(n);
  auto bin_of = [&](double y) {
    return static_cast<std::size_t>(
        std::clamp(static_cast<std::ptrdiff_t>((y - lo) / h), std::ptrdiff_t{0},
                   static_cast<std::ptrdiff_t>(n) - 1));
  };
  auto edge = [&](std::size_t m) { return lo + static_cast<double>(m) * h; };

  auto explicit_branch = [&](double j) {
    double a = std::max(1.0 / (j + alpha), u0);
    double b = std::min(u1, cap);
    if (j - 1.0 + alpha > 0.0) b = std::min(b, 1.0 / (j - 1.0 + alpha));
    if (!(b > a)) return;
    const double ya = std::max(1.0 / b - j, lo);
    const double yb = std::min(a > 0.0 ? 1.0 / a - j : lo + width, lo + width);
    if (!(yb > ya)) return;
    for (std::size_t m = bin_of(ya); m < n; ++m) {
      const double c = std::max(ya, edge(m));
      const double d = std::min(yb, m + 1 == n ? lo + width : edge(m + 1));
      if (d > c) row[m] += (d - c) / ((j + c) * (j + d));
      if (edge(m + 1) >= yb) break;
    }
  };

  // sum over j in [ja, jb] of 1/(j + c) - 1/(j + d); jb may be infinite
  auto group = [&](double ja, double jb) {
    using boost::math::digamma;
    const bool finite = std::isfinite(jb);
    for (std::size_t m = 0; m < n; ++m) {
      const double c = edge(m);
      const double d = m + 1 == n ? lo + width : edge(m + 1);
      double s;
      if (finite && jb - ja < 16) {
        s = 0.0;
        for (double j = ja; j <= jb; j += 1.0) s += (d - c) / ((j + c) * (j + d));
      } else {
        s = digamma(ja + d) - digamma(ja + c);
        if (finite) s -= digamma(jb + 1.0 + d) - digamma(jb + 1.0 + c);
      }
      row[m] += s;
    }
  };

  if (!(u1 > u0)) return;
  const double inf = std::numeric_limits<double>::infinity();
  const double j_first = std::max<double>(j_floor, std::floor(1.0 / std::min(u1, cap) + 1.0 - alpha));
  const double j_last = u0 > 0.0 ? std::floor(1.0 / u0 + 1.0 - alpha) : inf;
  if (j_last - j_first <= 4.0) {
    for (double j = j_first; j <= j_last; j += 1.0) explicit_branch(j);
    return;
  }
  explicit_branch(j_first);
  explicit_branch(j_first + 1.0);
  group(j_first + 2.0, std::isfinite(j_last) ? j_last - 2.0 : inf);
  if (std::isfinite(j_last)) {
    explicit_branch(j_last - 1.0);
    explicit_branch(j_last);
  }
}

}  // namespace

UlamMatrix ulam_matrix(const AlphaContext& ctx, std::size_t bins, Parallelism par) {
  if (!(ctx.alpha() > 0.0)) throw Error(ErrorCode::UnsupportedAlpha, "Ulam matrix needs alpha > 0");
  if (bins < 16) throw Error(ErrorCode::OutOfDomain, "Ulam matrix needs at least 16 bins");
  const double alpha = ctx.alpha();
  const double lo = ctx.lo();
  const double h = 1.0 / static_cast<double>(bins);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(bins);
  parallel_for(bins, par, [&](std::size_t k) {
    std::vector<double> row(bins, 0.0);
    const double a = lo + static_cast<double>(k) * h;
    const double b = k + 1 == bins ? ctx.hi() : lo + static_cast<double>(k + 1) * h;
    if (b > 0.0) add_side(alpha, std::max(a, 0.0), b, alpha, ctx.j_min(), lo, 1.0, row);
    if (a < 0.0) add_side(alpha, std::max(-b, 0.0), -a, 1.0 - alpha, 2, lo, 1.0, row);
    auto& out = rows[k];
    for (std::size_t m = 0; m < bins; ++m) {
      if (row[m] > 0.0) out.emplace_back(static_cast<std::uint32_t>(m), row[m] / (b - a));
    }
  });
  UlamMatrix mat;
  mat.lo = lo;
  mat.hi = ctx.hi();
  mat.bins = bins;
  mat.row_start.reserve(bins + 1);
  mat.row_start.push_back(0);
  for (const auto& r : rows) {
    for (const auto& [c, v] : r) {
      mat.col.push_back(c);
      mat.val.push_back(v);
    }
    mat.row_start.push_back(mat.col.size());
  }
  return mat;
}

PiecewiseConstantDensity ulam_density(const AlphaContext& ctx, const UlamOptions& opt) {
  const UlamMatrix mat = ulam_matrix(ctx, opt.bins, opt.par);
  std::vector<double> mass(opt.bins, 1.0 / static_cast<double>(opt.bins));
  PiecewiseConstantDensity d;
  d.lo = ctx.lo();
  d.hi = ctx.hi();
  for (std::size_t it = 1; it <= opt.max_iters; ++it) {
    std::vector<double> next = mat.push(mass);
    double total = 0.0;
    for (double v : next) total += v;
    double change = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) {
      next[k] /= total;
      change += std::abs(next[k] - mass[k]);
    }
    mass = std::move(next);
    d.iterations = it;
    d.last_change = change;
    if (change < opt.tol) {
      d.converged = true;
      break;
    }
  }
  d.weights.resize(opt.bins);
  const double h = d.bin_width();
  for (std::size_t k = 0; k < opt.bins; ++k) d.weights[k] = mass[k] / h;
  return d;
}

namespace {

void add_segment(PiecewiseFractionalDensity& d, double a, double b, std::vector<FractionalTerm> terms) {
  if (!(b > a)) return;
  FractionalSegment s{{a, b}, std::move(terms), {}};
  if (s.terms.size() > kChebThreshold) fit_chebyshev(s);
  d.segments.push_back(std::move(s));
}

}  // namespace

PiecewiseFractionalDensity closed_form_density(double alpha) {
  return closed_form_density(alpha, ClosedFormRegime::Auto);
}

PiecewiseFractionalDensity closed_form_density(double alpha, ClosedFormRegime regime) {
  constexpr double G = kGoldenBig;
  constexpr double g = kGolden;
  if (regime == ClosedFormRegime::Auto) {
    if (alpha > g && alpha <= 1.0) {
      regime = ClosedFormRegime::Gauss;
    } else if (alpha > 0.5 && alpha <= g) {
      regime = ClosedFormRegime::Golden;
    } else if (alpha >= kSqrt2Minus1 - 1e-15 && alpha <= 0.5) {
      regime = ClosedFormRegime::Prop1;
    } else {
      throw Error(ErrorCode::UnsupportedAlpha,
                  fmt::format("no closed-form density for alpha = {} < sqrt(2) - 1", alpha));
    }
  }
  auto require = [&](double lo, double hi) {
    if (!(alpha >= lo - 1e-15 && alpha <= hi + 1e-15)) {
      throw Error(ErrorCode::UnsupportedAlpha,
                  fmt::format("closed-form regime does not cover alpha = {}", alpha));
    }
  };
  PiecewiseFractionalDensity d;
  const double lo = alpha - 1.0;
  switch (regime) {
    case ClosedFormRegime::Gauss: {
      require(g, 1.0);
      const double c = (1.0 - alpha) / alpha;
      add_segment(d, lo, c, {{1.0, 2.0}});
      add_segment(d, c, alpha, {{1.0, 1.0}});
      d.norm_constant = std::log1p(alpha);
      d.regime = "g < alpha <= 1";
      break;
    }
    case ClosedFormRegime::Golden: {
      require(0.5, g);
      const double c1 = (1.0 - 2.0 * alpha) / alpha;
      const double c2 = (2.0 * alpha - 1.0) / (1.0 - alpha);
      add_segment(d, lo, c1, {{1.0, G + 1.0}});
      add_segment(d, c1, c2, {{1.0, 2.0}});
      add_segment(d, c2, alpha, {{1.0, G}});
      d.norm_constant = std::log(G);
      d.regime = "1/2 < alpha <= g";
      break;
    }
    case ClosedFormRegime::Prop1: {
      require(kSqrt2Minus1, 0.5);
      const double c1 = (2.0 * alpha - 1.0) / (1.0 - alpha);
      const double c2 = (1.0 - 2.0 * alpha) / alpha;
      add_segment(d, lo, c1, {{1.0, G + 1.0}});
      add_segment(d, c1, c2, {{1.0, G + 1.0}, {1.0, G}, {-1.0, 2.0}});
      add_segment(d, c2, alpha, {{1.0, G}});
      d.norm_constant = std::log(G);
      d.regime = "sqrt(2) - 1 <= alpha <= 1/2";
      break;
    }
    case ClosedFormRegime::Auto:
      break;
  }
  return d;
}

PiecewiseFractionalDensity series_density_one_over_r(int r, int trunc_depth, double min_width) {
  if (trunc_depth < 1) throw Error(ErrorCode::OutOfDomain, "series density needs depth >= 1");
  const NatExtDomain dom = build_domain(r, trunc_depth, min_width);
  PiecewiseFractionalDensity d;
  // int_a^b (1 + x y)^-2 dy = 1/(x + 1/b) - 1/(x + 1/a)
  std::vector<const Strip*> order;
  for (const auto& s : dom.strips) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const Strip* a, const Strip* b) { return a->x.lo < b->x.lo; });
  for (const Strip* s : order) {
    std::vector<FractionalTerm> terms;
    terms.reserve(1 + 2 * s->excluded.size());
    terms.push_back({1.0, 1.0 / s->y.hi});
    for (const auto& iv : s->excluded.intervals()) {
      terms.push_back({-1.0, 1.0 / iv.hi});
      if (iv.lo > 0.0) terms.push_back({1.0, 1.0 / iv.lo});
    }
    add_segment(d, s->x.lo, s->x.hi, std::move(terms));
  }
  d.norm_constant = dom.C_alpha;
  d.regime = fmt::format("alpha = 1/{} series, depth {}", r, trunc_depth);
  return d;
}

double eval_density(const Density& d, double x) {
  return std::visit([x](const auto& v) { return v(x); }, d);
}

double integral(const Density& d, double a, double b) {
  if (const auto* c = std::get_if<PiecewiseConstantDensity>(&d)) {
    const double h = c->bin_width();
    double s = 0.0;
    for (std::size_t k = 0; k < c->weights.size(); ++k) {
      const double lo = c->lo + static_cast<double>(k) * h;
      const double w = std::min(b, lo + h) - std::max(a, lo);
      if (w > 0.0) s += w * c->weights[k];
    }
    return s;
  }
  const auto& f = std::get<PiecewiseFractionalDensity>(d);
  double s = 0.0;
  for (const auto& seg : f.segments) {
    const double lo = std::max(a, seg.range.lo);
    const double hi = std::min(b, seg.range.hi);
    if (hi > lo) s += term_integral(seg.terms, lo, hi);
  }
  return s / f.norm_constant;
}

double integral(const Density& d) {
  return std::visit(
      [&](const auto& v) {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, PiecewiseConstantDensity>) {
          return integral(d, v.lo, v.hi);
        } else {
          return integral(d, v.segments.front().range.lo, v.segments.back().range.hi);
        }
      },
      d);
}

std::vector<double> breakpoints(const Density& d) {
  if (const auto* c = std::get_if<PiecewiseConstantDensity>(&d)) {
    std::vector<double> b(c->weights.size() + 1);
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = c->lo + static_cast<double>(k) * c->bin_width();
    b.back() = c->hi;
    return b;
  }
  return std::get<PiecewiseFractionalDensity>(d).breakpoints();
}

namespace {

template <unsigned N, class F>
double gauss_panel(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, N>::integrate(f, a, b);
}

template <class F>
double gauss_panel(int points, F&& f, double a, double b) {
  if (points <= 7) return gauss_panel<7>(f, a, b);
  if (points <= 10) return gauss_panel<10>(f, a, b);
  if (points <= 15) return gauss_panel<15>(f, a, b);
  return gauss_panel<20>(f, a, b);
}

}  // namespace

double l1_distance(const Density& a, const Density& b, int quad_points) {
  std::vector<double> cuts = breakpoints(a);
  const std::vector<double> other = breakpoints(b);
  const double lo = std::max(cuts.front(), other.front());
  const double hi = std::min(cuts.back(), other.back());
  cuts.insert(cuts.end(), other.begin(), other.end());
  cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto diff = [&](double x) { return std::abs(eval_density(a, x) - eval_density(b, x)); };
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double p = std::max(cuts[k], lo);
    const double q = std::min(cuts[k + 1], hi);
    if (q > p) s += gauss_panel(quad_points, diff, p, q);
  }
  return s;
}

double rohlin_entropy(const Density& d) {
  if (const auto* c = std::get_if<PiecewiseConstantDensity>(&d)) {
    const double h = c->bin_width();
    double s = 0.0;
    for (std::size_t k = 0; k < c->weights.size(); ++k) {
      const double a = c->lo + static_cast<double>(k) * h;
      const double b = k + 1 == c->weights.size() ? c->hi : a + h;
      s += c->weights[k] * rohlin_weight(a, b);
    }
    return s;
  }
  const auto& f = std::get<PiecewiseFractionalDensity>(d);
  std::vector<double> cuts = f.breakpoints();
  cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = std::max(cuts[k], f.segments.front().range.lo);
    const double b = std::min(cuts[k + 1], f.segments.back().range.hi);
    if (!(b > a)) continue;
    auto integrand = [&](double x) { return -2.0 * std::log(std::abs(x)) * f(x); };
    double err = 0.0;
    double v = 0.0;
    if (a == 0.0 || b == 0.0) {
      boost::math::quadrature::tanh_sinh<double> ts;
      v = ts.integrate(integrand, a, b, 1e-12, &err);
    } else {
      v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, a, b, 15,
                                                                         1e-12, &err);
    }
    if (!std::isfinite(v) || err > 1e-8) {
      throw Error(ErrorCode::QuadratureFailure,
                  fmt::format("entropy integral on [{}, {}] has error estimate {}", a, b, err));
    }
    s += v;
  }
  return s;
}

std::string density_csv(const Density& d, std::size_t points) {
  const auto cuts = breakpoints(d);
  const double lo = cuts.front();
  const double hi = cuts.back();
  std::string out = "x,rho\n";
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + (static_cast<double>(i) + 0.5) * (hi - lo) / static_cast<double>(points);
    out += fmt::format("{:.17g},{:.17g}\n", x, eval_density(d, x));
  }
  return out;
}

std::string density_json(const Density& d, std::size_t max_terms) {
  nlohmann::json j;
  j["integral"] = integral(d);
  j["entropy"] = rohlin_entropy(d);
  if (const auto* c = std::get_if<PiecewiseConstantDensity>(&d)) {
    j["kind"] = "ulam";
    j["lo"] = c->lo;
    j["hi"] = c->hi;
    j["bins"] = c->bin_count();
    j["iterations"] = c->iterations;
    j["last_change"] = c->last_change;
    j["converged"] = c->converged;
    return j.dump(2);
  }
  const auto& f = std::get<PiecewiseFractionalDensity>(d);
  j["kind"] = "fractional";
  j["regime"] = f.regime;
  j["norm_constant"] = f.norm_constant;
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : f.segments) {
    nlohmann::json terms = nlohmann::json::array();
    for (std::size_t k = 0; k < std::min(max_terms, s.terms.size()); ++k) {
      terms.push_back({{"coef", s.terms[k].coef}, {"shift", s.terms[k].shift}});
    }
    segs.push_back({{"range", {s.range.lo, s.range.hi}},
                    {"term_count", s.terms.size()},
                    {"terms", std::move(terms)},
                    {"terms_truncated", s.terms.size() > max_terms}});
  }
  j["segments"] = std::move(segs);
  return j.dump(2);
}

}  // namespace alphacf
