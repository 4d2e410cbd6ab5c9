#pragma once

#include <cstdint>

namespace alphacf {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-keyed random stream. The stream for (seed, index) is fixed, so
/// per-item draws do not depend on how items are spread over threads.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t index) noexcept
      : state_(mix64(seed ^ mix64(index + kGamma))) {}

  std::uint64_t next() noexcept {
    state_ += kGamma;
    return mix64(state_);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on the open interval (lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_;
};

/// Child seed for a sub-computation (scan row, calibration replica, ...).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed) + 0x632be59bd9b4e019ULL * (index + 1));
}

}  // namespace alphacf
