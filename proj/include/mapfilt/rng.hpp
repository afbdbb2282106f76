#pragma once

#include <cstdint>
#include <random>

namespace mapfilt {

/// Seeded generator with portable uniform and Gaussian draws. The standard
/// distributions are implementation-defined, so the transforms live here to
/// keep a given seed bitwise reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for replicate or restart `index`.
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  double uniform();  // [0, 1)
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace mapfilt
