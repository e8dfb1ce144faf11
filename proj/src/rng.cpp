#include "nhpg/rng.hpp"

#include <array>

namespace nhpg {

Rng Rng::substream(std::uint64_t seed, std::uint64_t stream_id) {
  const std::array<std::uint32_t, 5> words = {
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
      0x6e687067u};
  std::seed_seq seq(words.begin(), words.end());
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return Rng((static_cast<std::uint64_t>(out[0]) << 32) | out[1]);
}

double Rng::uniform() {
  // 53 random bits mapped to the open interval (0, 1).
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::gamma(double shape, double scale) {
  std::gamma_distribution<double> dist(shape, scale);
  return dist(engine_);
}

double Rng::inverse_gamma(double shape, double scale) {
  return 1.0 / gamma(shape, 1.0 / scale);
}

}  // namespace nhpg
