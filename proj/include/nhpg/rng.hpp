#pragma once

#include <cstdint>
#include <random>

namespace nhpg {

/// Random stream used by every sampler in the library.
///
/// Wraps a 64-bit Mersenne Twister together with the distribution objects that
/// carry state between calls (the normal generator caches its second variate).
/// A stream is not thread-safe; concurrent work needs one stream per worker,
/// obtained with `Rng::substream`.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream derived from a root seed and a stream identifier.
  static Rng substream(std::uint64_t seed, std::uint64_t stream_id);

  double uniform();  // (0, 1), never returns 0
  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }
  double exponential() { return exponential_(engine_); }
  double gamma(double shape, double scale);
  /// Inverse-Gamma with density proportional to x^{-shape-1} exp(-scale / x).
  double inverse_gamma(double shape, double scale);
  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::exponential_distribution<double> exponential_{1.0};
};

}  // namespace nhpg
