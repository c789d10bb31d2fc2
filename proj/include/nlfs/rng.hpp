#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace nlfs {

/// Mixes one splitmix64 step into `state` and returns the output word.
std::uint64_t splitmix64(std::uint64_t& state);

/// Hashes a tuple of keys into a single seed. Used to fan a base seed out to
/// per-replicate streams: derive_seed({base, scenario_key, replicate}) gives
/// statistically independent, order-insensitive-to-scheduling streams, so
/// study results do not depend on thread count or task order.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys);

/// Random stream for the samplers. All variate generation in the library goes
/// through this class so that a fixed seed reproduces a chain bit for bit.
/// Uniforms come from the top 53 bits of mt19937_64; normals use the AS241
/// quantile applied to a single uniform, keeping the draw count per variate
/// fixed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  /// Uniform on (0,1); never returns an exact 0 or 1.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal draw.
  double normal();

  /// Gamma(shape, scale) via Marsaglia-Tsang squeeze.
  double gamma(double shape, double scale = 1.0);

  double exponential() { return -std::log(uniform()); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace nlfs
