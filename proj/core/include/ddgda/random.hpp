#pragma once

#include <cstdint>
#include <random>

namespace ddgda {

/// Seeded random stream owned by one run.
///
/// Draw accounting is fixed so traces are reproducible across standard
/// library implementations: `uniform()` and `index()` consume one engine
/// output, `normal()` consumes exactly two (Box-Muller, no cached value).
class Rng {
public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    ++draws_;
    // 53 random mantissa bits, shifted off zero.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);

  /// Engine outputs consumed so far.
  std::uint64_t draws() const noexcept { return draws_; }

private:
  Engine engine_;
  std::uint64_t draws_ = 0;
};

/// Seed for an independent sub-stream (dither, output-iterate selection,
/// replication cells) derived from a base seed with splitmix64.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

} // namespace ddgda
