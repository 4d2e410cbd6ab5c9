#include "alphacf/natext.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "alphacf/error.hpp"
#include "alphacf/rng.hpp"
#include "alphacf/symbolic.hpp"

namespace alphacf {

namespace {

constexpr std::uint64_t kMaxProposalsPerPoint = 1'000'000;

TruncatedSet truncated(const AdmissibilityClass& cls, int depth, Interval base, Interval reach,
                       double min_width) {
  AdmissibleImages imgs = admissible_images(cls, depth, base, reach, min_width);
  TruncatedSet out;
  out.sequences = imgs.images.size();
  out.pruned = imgs.pruned;
  out.excluded = IntervalSet::from_unsorted(std::move(imgs.images));
  out.unexplored = IntervalSet::from_unsorted(std::move(imgs.unexplored));
  return out;
}

IntervalSet clip(const IntervalSet& s, Interval range) {
  return s.intersect(IntervalSet::from_unsorted({range}));
}

// Integral of (1 + x y)^-2 over [x0, x1] x [a, b].
double rect_weight(double x0, double x1, double a, double b) {
  auto prim = [&](double c) { return std::log1p(x1 * c) - std::log1p(x0 * c); };
  return prim(b) - prim(a);
}

double strip_weight(const Strip& s, const IntervalSet& holes) {
  double w = rect_weight(s.x.lo, s.x.hi, s.y.lo, s.y.hi);
  for (const auto& iv : holes.intervals()) w -= rect_weight(s.x.lo, s.x.hi, iv.lo, iv.hi);
  return w;
}

void finish(NatExtDomain& d) {
  d.C_alpha = 0.0;
  d.C_unexplored = 0.0;
  for (const auto& s : d.strips) {
    d.C_alpha += strip_weight(s, s.excluded);
    for (const auto& iv : s.unexplored.intervals()) {
      d.C_unexplored += rect_weight(s.x.lo, s.x.hi, iv.lo, iv.hi);
    }
  }
}

}  // namespace

BetaXi beta_xi(int r) {
  if (r < 3) throw Error(ErrorCode::UnsupportedAlpha, fmt::format("beta_xi needs r >= 3, got {}", r));
  const double rp = r + 1.0;
  // (r + 1 - sqrt((r + 1)^2 - 4)) / 2 without cancellation
  const double beta = 2.0 / (rp + std::sqrt(rp * rp - 4.0));
  return {beta, 1.0 / (r - beta)};
}

BSets build_B_sets(int r, int depth, double min_width) {
  const auto [beta, xi] = beta_xi(r);
  if (depth < 1) throw Error(ErrorCode::OutOfDomain, "build_B_sets: depth must be positive");
  // Every continuation lands in [beta, <2^{r-2}, 3; 1>].
  double top = 0.5;
  for (int k = 0; k < r - 2; ++k) top = 1.0 / (2.0 - top);
  const Interval base{1.0 - xi, 1.0};
  const Interval reach{beta, top};

  BSets b;
  b.r = r;
  b.depth = depth;
  b.min_width = min_width;
  b.plus = truncated(AdmissibilityClass::plus(r), depth, base, reach, min_width);
  b.minus = truncated(AdmissibilityClass::minus(r), depth, base, reach, min_width);
  for (int i = 2; i <= r - 1; ++i) {
    b.inner.push_back(truncated(AdmissibilityClass::inner(r, i), depth, base, reach, min_width));
  }
  return b;
}

NatExtDomain build_domain(int r, int depth, double min_width) {
  const BSets b = build_B_sets(r, depth, min_width);
  NatExtDomain d;
  d.alpha = 1.0 / r;
  d.r = r;
  d.depth = depth;
  const BetaXi bx = beta_xi(r);
  d.beta = bx.beta;
  d.xi = bx.xi;

  double top = 1.0 - d.xi;
  for (int i = 1; i <= r - 1; ++i) {
    if (i > 1) top = m_zero(top).value;
    const TruncatedSet& bs = i == 1 ? b.minus : b.inner[static_cast<std::size_t>(i - 2)];
    Strip s;
    s.label = i == 1 ? "B-" : fmt::format("B{}", i);
    s.x = {-static_cast<double>(i) / (i + 1), -static_cast<double>(i - 1) / i};
    s.y = {0.0, top};
    s.excluded = clip(bs.excluded, s.y);
    s.unexplored = clip(bs.unexplored, s.y);
    d.strips.push_back(std::move(s));
  }
  Strip s;
  s.label = "B+";
  s.x = {0.0, 1.0 / r};
  s.y = {0.0, 1.0 - d.beta};
  s.excluded = clip(b.plus.excluded, s.y);
  s.unexplored = clip(b.plus.unexplored, s.y);
  d.strips.push_back(std::move(s));
  finish(d);
  return d;
}

NatExtDomain prop1_domain(double alpha) {
  if (!(alpha >= kSqrt2Minus1 - 1e-15 && alpha <= 0.5 + 1e-15)) {
    throw Error(ErrorCode::UnsupportedAlpha,
                fmt::format("this domain needs sqrt(2) - 1 <= alpha <= 1/2, got {}", alpha));
  }
  const double x1 = (2.0 * alpha - 1.0) / (1.0 - alpha);
  const double x2 = (1.0 - 2.0 * alpha) / alpha;
  const double g = kGolden;
  NatExtDomain d;
  d.alpha = alpha;
  d.depth = 0;
  Strip left{"left", {alpha - 1.0, x1}, {0.0, 1.0 - g}, {}, {}};
  Strip mid{"middle", {x1, x2}, {0.0, g}, IntervalSet::from_unsorted({{1.0 - g, 0.5}}), {}};
  Strip right{"right", {x2, alpha}, {0.0, g}, {}, {}};
  for (Strip* s : {&left, &mid, &right}) {
    if (s->x.width() > 0.0) d.strips.push_back(std::move(*s));
  }
  finish(d);
  return d;
}

Membership classify(const NatExtDomain& d, NatExtPoint p, double tol) {
  Membership best = Membership::Outside;
  for (const auto& s : d.strips) {
    if (!s.x.contains(p.x, tol) || !s.y.contains(p.y, tol)) continue;
    Membership m = Membership::Inside;
    if (s.excluded.contains_interior(p.y, tol)) {
      m = Membership::Outside;
    } else if (s.excluded.contains(p.y, tol) || s.unexplored.contains(p.y, tol) ||
               p.x - s.x.lo <= tol || s.x.hi - p.x <= tol || p.y - s.y.lo <= tol ||
               s.y.hi - p.y <= tol) {
      m = Membership::Uncertain;
    }
    if (m == Membership::Inside) return m;
    if (m == Membership::Uncertain) best = m;
  }
  return best;
}

bool contains(const NatExtDomain& d, NatExtPoint p, double tol) {
  return classify(d, p, tol) != Membership::Outside;
}

NatExtPoint tbar(const AlphaContext& ctx, NatExtPoint p) {
  const Step s = t_alpha(ctx, p.x);
  return {s.value, 1.0 / (s.digit.j + sign_value(s.digit.sign) * p.y)};
}

NatExtPoint prop1_natext(double alpha, NatExtPoint p) {
  if (!(alpha >= kSqrt2Minus1 - 1e-15 && alpha <= 0.5 + 1e-15)) {
    throw Error(ErrorCode::UnsupportedAlpha,
                fmt::format("this extension needs sqrt(2) - 1 <= alpha <= 1/2, got {}", alpha));
  }
  return tbar(AlphaContext(alpha), p);
}

double tbar_jacobian(const AlphaContext& ctx, NatExtPoint p) {
  const Digit k = t_alpha(ctx, p.x).digit;
  const double q = p.x * (k.j + sign_value(k.sign) * p.y);
  return 1.0 / (q * q);
}

KSample sample_K(const NatExtDomain& d, std::size_t count, std::uint64_t seed, Parallelism par) {
  // Envelope: uniform on each strip rectangle scaled by the max of the weight
  // there, attained at a corner since 1 + x y is bilinear.
  std::vector<double> cum;
  std::vector<double> env;
  double total = 0.0;
  for (const auto& s : d.strips) {
    double m = 0.0;
    for (double x : {s.x.lo, s.x.hi}) {
      for (double y : {s.y.lo, s.y.hi}) m = std::max(m, k_weight({x, y}));
    }
    env.push_back(m);
    total += m * s.x.width() * s.y.width();
    cum.push_back(total);
  }

  KSample out;
  out.points.resize(count);
  std::vector<std::uint64_t> tries(count, 0);
  parallel_for(count, par, [&](std::size_t i) {
    Stream rng(seed, i);
    for (std::uint64_t t = 1; t <= kMaxProposalsPerPoint; ++t) {
      const double u = rng.uniform() * total;
      const std::size_t k = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(),
                                   static_cast<std::ptrdiff_t>(cum.size()) - 1));
      const Strip& s = d.strips[k];
      const NatExtPoint p{rng.uniform(s.x.lo, s.x.hi), rng.uniform(s.y.lo, s.y.hi)};
      if (rng.uniform() * env[k] >= k_weight(p)) continue;
      if (classify(d, p) != Membership::Inside) continue;
      out.points[i] = p;
      tries[i] = t;
      return;
    }
    throw Error(ErrorCode::RejectionStarvation,
                fmt::format("no accepted point after {} proposals", kMaxProposalsPerPoint));
  });
  out.proposals = std::accumulate(tries.begin(), tries.end(), std::uint64_t{0});
  if (count > 0 && out.acceptance() < 0.01) {
    throw Error(ErrorCode::RejectionStarvation,
                fmt::format("acceptance ratio {:.4g} below 1%", out.acceptance()));
  }
  return out;
}

namespace {

AlphaContext context_of(const NatExtDomain& d) {
  return d.r > 0 ? AlphaContext::one_over(d.r) : AlphaContext(d.alpha);
}

std::vector<double> histogram(const NatExtDomain& d, const std::vector<NatExtPoint>& pts, int bins) {
  std::vector<double> h(static_cast<std::size_t>(bins) * bins, 0.0);
  const double x0 = d.alpha - 1.0;
  for (const auto& p : pts) {
    const int i = std::clamp(static_cast<int>((p.x - x0) * bins), 0, bins - 1);
    const int j = std::clamp(static_cast<int>(p.y * bins), 0, bins - 1);
    h[static_cast<std::size_t>(i) * bins + j] += 1.0;
  }
  for (double& v : h) v /= static_cast<double>(pts.size());
  return h;
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace

InvarianceReport check_invariance(const NatExtDomain& d, std::size_t count, int bins,
                                  std::uint64_t seed, Parallelism par) {
  const AlphaContext ctx = context_of(d);
  const KSample a = sample_K(d, count, derive_seed(seed, 0), par);
  std::vector<NatExtPoint> images(count);
  std::vector<char> inside(count, 1);
  parallel_for(count, par, [&](std::size_t i) {
    images[i] = tbar(ctx, a.points[i]);
    inside[i] = contains(d, images[i], 1e-9) ? 1 : 0;
  });
  const KSample b = sample_K(d, count, derive_seed(seed, 1), par);

  InvarianceReport rep{};
  rep.outside = static_cast<std::size_t>(std::count(inside.begin(), inside.end(), 0));
  rep.distance = l1(histogram(d, images, bins), histogram(d, b.points, bins));

  constexpr int kNullPairs = 6;
  std::vector<double> null;
  for (int k = 0; k < kNullPairs; ++k) {
    const KSample p = sample_K(d, count, derive_seed(seed, 2 + 2 * k), par);
    const KSample q = sample_K(d, count, derive_seed(seed, 3 + 2 * k), par);
    null.push_back(l1(histogram(d, p.points, bins), histogram(d, q.points, bins)));
  }
  const double mean = std::accumulate(null.begin(), null.end(), 0.0) / kNullPairs;
  double var = 0.0;
  for (double v : null) var += (v - mean) * (v - mean);
  var /= kNullPairs - 1;
  rep.null_mean = mean;
  rep.null_sd = std::sqrt(var);
  rep.threshold = mean + 5.0 * rep.null_sd;
  return rep;
}

InjectivityReport check_injectivity(const NatExtDomain& d, std::size_t count, std::uint64_t seed,
                                    Parallelism par) {
  const AlphaContext ctx = context_of(d);
  const KSample s = sample_K(d, count, seed, par);
  std::vector<NatExtPoint> images(count);
  std::vector<char> hit(count, 0);
  parallel_for(count, par, [&](std::size_t i) {
    const NatExtPoint p = s.points[i];
    const NatExtPoint q = tbar(ctx, p);
    images[i] = q;
    const double inv = 1.0 / q.y;
    // Other preimages of q: x = s / (k + x'), y = s (1/y' - k) with y in [0, 1].
    for (int sg : {1, -1}) {
      const double kmin = sg > 0 ? std::ceil(inv - 1.0) : std::ceil(inv);
      const double kmax = sg > 0 ? std::floor(inv) : std::floor(inv + 1.0);
      for (double k = kmin; k <= kmax; k += 1.0) {
        const double y = sg > 0 ? inv - k : k - inv;
        const double x = sg / (k + q.x);
        if (!ctx.contains(x, 0.0) || x == 0.0) continue;
        const Digit dg = digit_of(ctx.alpha(), x);
        if (dg.j != static_cast<int>(k) || sign_value(dg.sign) != sg) continue;
        if (std::abs(x - p.x) + std::abs(y - p.y) <= 1e-6) continue;
        if (classify(d, {x, y}, 1e-9) == Membership::Inside) hit[i] = 1;
      }
    }
  });
  InjectivityReport rep{};
  rep.checked = count;
  rep.analytic_collisions = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return images[a].x < images[b].x || (images[a].x == images[b].x && a < b);
  });
  for (std::size_t u = 0; u < count; ++u) {
    const auto& qa = images[order[u]];
    for (std::size_t v = u + 1; v < count && images[order[v]].x - qa.x < 1e-9; ++v) {
      const auto& qb = images[order[v]];
      if (std::hypot(qa.x - qb.x, qa.y - qb.y) >= 1e-9) continue;
      const auto& pa = s.points[order[u]];
      const auto& pb = s.points[order[v]];
      if (std::hypot(pa.x - pb.x, pa.y - pb.y) > 1e-6) ++rep.pair_collisions;
    }
  }
  return rep;
}

Complementarity complementarity_check(const BSets& b) {
  const auto [beta, xi] = beta_xi(b.r);
  const IntervalSet plus = clip(b.plus.excluded, {xi, 1.0 - beta});
  const IntervalSet minus = clip(b.minus.excluded, {beta, 1.0 - xi});
  const double overlap = plus.intersect(minus.reflected()).measure();
  return {overlap, plus.measure() + minus.measure() - overlap, 1.0 - beta - xi};
}

Complementarity complementarity_check(int r, int depth, double min_width) {
  if (depth < 2) throw Error(ErrorCode::OutOfDomain, "complementarity_check needs depth >= 2");
  return complementarity_check(build_B_sets(r, depth, min_width));
}

std::string interval_set_json(const IntervalSet& s) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& iv : s.intervals()) j.push_back({iv.lo, iv.hi});
  return j.dump();
}

std::string domain_summary_json(const NatExtDomain& d) {
  nlohmann::json j;
  j["alpha"] = d.alpha;
  j["r"] = d.r;
  j["depth"] = d.depth;
  j["beta"] = d.beta;
  j["xi"] = d.xi;
  j["C_alpha"] = d.C_alpha;
  j["C_unexplored"] = d.C_unexplored;
  nlohmann::json strips = nlohmann::json::array();
  for (const auto& s : d.strips) {
    strips.push_back({{"label", s.label},
                      {"x", {s.x.lo, s.x.hi}},
                      {"y", {s.y.lo, s.y.hi}},
                      {"excluded_intervals", s.excluded.size()},
                      {"excluded_measure", s.excluded.measure()},
                      {"unexplored_measure", s.unexplored.measure()},
                      {"weight", strip_weight(s, s.excluded)}});
  }
  j["strips"] = std::move(strips);
  return j.dump(2);
}

}  // namespace alphacf
