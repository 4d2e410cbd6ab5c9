#pragma once

// Entropy of T_alpha: Birkhoff averages of -2 log|x| along single orbits,
// ensemble means over uniformly drawn starting points, the explicit values
// for alpha >= sqrt(2) - 1, and scans over alpha or n.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alphacf/maps.hpp"
#include "alphacf/parallel.hpp"

namespace alphacf {

inline constexpr std::uint64_t kDefaultSeed = 0xA1FA;

/// -(2/n) sum_{j<n} log|T^j(x0)|. Throws OrbitHitZero if an iterate is 0.
double birkhoff_entropy(const AlphaContext& ctx, std::size_t n, double x0);

struct OrbitValues {
  std::vector<double> values;  // one Birkhoff average per orbit, in index order
  std::uint64_t discarded = 0;
};

/// Orbit k starts from Stream(seed, k); a start whose orbit hits 0 is
/// replaced by the next draw of the same stream and counted as discarded.
OrbitValues orbit_values(const AlphaContext& ctx, std::size_t n, std::size_t N,
                         std::uint64_t seed, Parallelism par = {});

struct EntropyEstimate {
  double alpha = 0.0;
  std::size_t n = 0;
  std::size_t N = 0;
  double mean = 0.0;
  double stddev = 0.0;     // of the per-orbit values
  double std_error = 0.0;  // stddev / sqrt(N)
  std::uint64_t seed = 0;
  std::uint64_t discarded = 0;
  std::optional<double> exact;
};

EntropyEstimate ensemble_entropy(const AlphaContext& ctx, std::size_t n, std::size_t N,
                                 std::uint64_t seed, Parallelism par = {});

/// pi^2 / (6 log(1 + alpha)) above g, pi^2 / (6 log G) on [sqrt 2 - 1, g].
std::optional<double> exact_entropy(double alpha);

struct StddevPoint {
  std::size_t n;
  double mean;
  double stddev;
};

struct StddevScan {
  std::vector<StddevPoint> points;
  double slope;  // least squares slope of log stddev against log n
};

/// The run for n_values[k] uses derive_seed(seed, k).
StddevScan stddev_scan(const AlphaContext& ctx, const std::vector<std::size_t>& n_values,
                       std::size_t N, std::uint64_t seed, Parallelism par = {});

/// steps uniformly spaced alphas from alpha_lo to alpha_hi (alpha_lo alone
/// when steps = 1); row k uses derive_seed(seed, k).
std::vector<EntropyEstimate> entropy_scan(double alpha_lo, double alpha_hi, std::size_t steps,
                                          std::size_t n, std::size_t N, std::uint64_t seed,
                                          Parallelism par = {});

/// Row k of entropy_scan.
EntropyEstimate entropy_scan_row(double alpha_lo, double alpha_hi, std::size_t steps,
                                 std::size_t k, std::size_t n, std::size_t N, std::uint64_t seed,
                                 Parallelism par = {});

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

std::string entropy_csv_header();
std::string entropy_csv_row(const EntropyEstimate& e);
std::string entropy_json(const std::vector<EntropyEstimate>& rows);

}  // namespace alphacf
