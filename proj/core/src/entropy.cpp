#include "alphacf/entropy.hpp"

#include <fmt/format.h>

#include <cmath>
#include <json.hpp>
#include <numbers>

#include "alphacf/error.hpp"
#include "alphacf/rng.hpp"

namespace alphacf {

namespace {

void require_positive_alpha(const AlphaContext& ctx) {
  if (!(ctx.alpha() > 0.0)) {
    throw Error(ErrorCode::UnsupportedAlpha, "entropy: alpha = 0 has no finite invariant density");
  }
}

// Same arithmetic as t_alpha without the per-step checks. Logs are taken of
// running products, flushed before they underflow.
bool birkhoff_sum(double alpha, std::size_t n, double x, double& sum) {
  double log_sum = 0.0;
  double prod = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (x == 0.0) return false;
    const double ax = std::abs(x);
    if (ax < 1e-100) {
      log_sum += std::log(ax);
    } else {
      prod *= ax;
      if (prod < 1e-250) {
        log_sum += std::log(prod);
        prod = 1.0;
      }
    }
    const double u = 1.0 / ax;
    if (!std::isfinite(u)) return false;
    x = u - std::floor(u + 1.0 - alpha);
  }
  sum = log_sum + std::log(prod);
  return true;
}

EntropyEstimate summarize(const AlphaContext& ctx, std::size_t n, std::uint64_t seed,
                          const OrbitValues& ov) {
  EntropyEstimate e;
  e.alpha = ctx.alpha();
  e.n = n;
  e.N = ov.values.size();
  e.seed = seed;
  e.discarded = ov.discarded;
  e.exact = exact_entropy(ctx.alpha());
  double s = 0.0;
  for (double v : ov.values) s += v;
  e.mean = s / static_cast<double>(e.N);
  double ss = 0.0;
  for (double v : ov.values) ss += (v - e.mean) * (v - e.mean);
  e.stddev = e.N > 1 ? std::sqrt(ss / static_cast<double>(e.N - 1)) : 0.0;
  e.std_error = e.stddev / std::sqrt(static_cast<double>(e.N));
  return e;
}

}  // namespace

double birkhoff_entropy(const AlphaContext& ctx, std::size_t n, double x0) {
  require_positive_alpha(ctx);
  if (n == 0) throw Error(ErrorCode::OutOfDomain, "birkhoff_entropy: n must be positive");
  if (x0 == 0.0) throw Error(ErrorCode::ZeroArgument, "birkhoff_entropy: x0 = 0");
  if (!ctx.contains(x0)) {
    throw Error(ErrorCode::OutOfDomain, fmt::format("birkhoff_entropy: x0 = {} outside I_alpha", x0));
  }
  double sum = 0.0;
  if (!birkhoff_sum(ctx.alpha(), n, x0, sum)) {
    throw Error(ErrorCode::OrbitHitZero, fmt::format("birkhoff_entropy: orbit of {} hits 0", x0));
  }
  return -2.0 * sum / static_cast<double>(n);
}

OrbitValues orbit_values(const AlphaContext& ctx, std::size_t n, std::size_t N,
                         std::uint64_t seed, Parallelism par) {
  require_positive_alpha(ctx);
  if (n == 0) throw Error(ErrorCode::OutOfDomain, "orbit_values: n must be positive");
  const double alpha = ctx.alpha();
  OrbitValues out;
  out.values.resize(N);
  std::vector<std::uint64_t> discards(N, 0);
  parallel_for(N, par, [&](std::size_t k) {
    Stream s(seed, k);
    double sum = 0.0;
    for (;;) {
      const double x0 = s.uniform(alpha - 1.0, alpha);
      if (birkhoff_sum(alpha, n, x0, sum)) break;
      ++discards[k];
    }
    out.values[k] = -2.0 * sum / static_cast<double>(n);
  });
  for (auto d : discards) out.discarded += d;
  return out;
}

EntropyEstimate ensemble_entropy(const AlphaContext& ctx, std::size_t n, std::size_t N,
                                 std::uint64_t seed, Parallelism par) {
  if (N < 2) throw Error(ErrorCode::OutOfDomain, "ensemble_entropy: N must be at least 2");
  return summarize(ctx, n, seed, orbit_values(ctx, n, N, seed, par));
}

std::optional<double> exact_entropy(double alpha) {
  constexpr double pi2_6 = std::numbers::pi * std::numbers::pi / 6.0;
  if (alpha > kGolden && alpha <= 1.0) return pi2_6 / std::log1p(alpha);
  if (alpha >= kSqrt2Minus1 && alpha <= kGolden) return pi2_6 / std::log(kGoldenBig);
  return std::nullopt;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto m = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

StddevScan stddev_scan(const AlphaContext& ctx, const std::vector<std::size_t>& n_values,
                       std::size_t N, std::uint64_t seed, Parallelism par) {
  if (n_values.size() < 3) throw Error(ErrorCode::OutOfDomain, "stddev_scan: need at least 3 n values");
  for (std::size_t k = 1; k < n_values.size(); ++k) {
    if (n_values[k] <= n_values[k - 1]) {
      throw Error(ErrorCode::OutOfDomain, "stddev_scan: n values must be ascending");
    }
  }
  StddevScan out;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < n_values.size(); ++k) {
    const auto e = ensemble_entropy(ctx, n_values[k], N, derive_seed(seed, k), par);
    out.points.push_back({n_values[k], e.mean, e.stddev});
    lx.push_back(std::log(static_cast<double>(n_values[k])));
    ly.push_back(std::log(e.stddev));
  }
  out.slope = least_squares_slope(lx, ly);
  return out;
}

EntropyEstimate entropy_scan_row(double alpha_lo, double alpha_hi, std::size_t steps,
                                 std::size_t k, std::size_t n, std::size_t N, std::uint64_t seed,
                                 Parallelism par) {
  if (steps == 0 || k >= steps) {
    throw Error(ErrorCode::OutOfDomain, "entropy_scan: need 0 <= k < steps");
  }
  if (!(alpha_lo > 0.0 && alpha_hi <= 1.0 && (alpha_lo < alpha_hi || steps == 1))) {
    throw Error(ErrorCode::OutOfDomain,
                fmt::format("entropy_scan: need 0 < alpha_lo < alpha_hi <= 1, got [{}, {}]",
                            alpha_lo, alpha_hi));
  }
  const double a = steps == 1 ? alpha_lo
                              : alpha_lo + (alpha_hi - alpha_lo) * static_cast<double>(k) /
                                               static_cast<double>(steps - 1);
  return ensemble_entropy(AlphaContext(a), n, N, derive_seed(seed, k), par);
}

std::vector<EntropyEstimate> entropy_scan(double alpha_lo, double alpha_hi, std::size_t steps,
                                          std::size_t n, std::size_t N, std::uint64_t seed,
                                          Parallelism par) {
  if (steps == 0) throw Error(ErrorCode::OutOfDomain, "entropy_scan: steps must be positive");
  std::vector<EntropyEstimate> rows;
  rows.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    rows.push_back(entropy_scan_row(alpha_lo, alpha_hi, steps, k, n, N, seed, par));
  }
  return rows;
}

std::string entropy_csv_header() { return "alpha,n,N,mean,stddev,stderr,exact,seed,discarded\n"; }

std::string entropy_csv_row(const EntropyEstimate& e) {
  return fmt::format("{:.17g},{},{},{:.17g},{:.17g},{:.17g},{},{},{}\n", e.alpha, e.n, e.N, e.mean,
                     e.stddev, e.std_error, e.exact ? fmt::format("{:.17g}", *e.exact) : "",
                     e.seed, e.discarded);
}

std::string entropy_json(const std::vector<EntropyEstimate>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : rows) {
    j.push_back({{"alpha", e.alpha},
                 {"n", e.n},
                 {"N", e.N},
                 {"mean", e.mean},
                 {"stddev", e.stddev},
                 {"stderr", e.std_error},
                 {"exact", e.exact ? nlohmann::json(*e.exact) : nlohmann::json(nullptr)},
                 {"seed", e.seed},
                 {"discarded", e.discarded}});
  }
  return j.dump(2);
}

}  // namespace alphacf
