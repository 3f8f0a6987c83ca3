#pragma once

#include <cmath>
#include <cstdint>

namespace tylercov {

// One reproducible random stream. Monte Carlo trials use stream_index as the
// trial id: the same (master_seed, stream_index) replays the same draws no
// matter how many streams run concurrently or in what order.
struct SeededStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

namespace rng {

// SplitMix64 finalizer (Vigna); full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based draw: a pure function of (stream, sample, slot). Samples can
// be generated in any order, or in parallel, with bit-identical results.
inline std::uint64_t draw(const SeededStream& s, std::uint64_t sample,
                          std::uint64_t slot) noexcept {
  std::uint64_t h = mix64(s.master_seed);
  h = mix64(h ^ s.stream_index);
  h = mix64(h ^ sample);
  h = mix64(h ^ slot);
  return h;
}

// Uniform on the open interval (0,1); never returns 0 or 1.
inline double uniform(const SeededStream& s, std::uint64_t sample,
                      std::uint64_t slot) noexcept {
  return static_cast<double>(draw(s, sample, slot) >> 11) * 0x1.0p-53 +
         0x1.0p-54;
}

inline double normal_from_uniforms(double u1, double u2) noexcept {
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Slot layout within one sample: slots 0 and 1 feed the texture draw (when
// the model has one), Gaussian component j consumes slots 2j+2 and 2j+3.
// ACG and compound-Gaussian sampling therefore share Gaussian draws.
inline constexpr std::uint64_t texture_slot0 = 0;
inline constexpr std::uint64_t texture_slot1 = 1;

inline double normal(const SeededStream& s, std::uint64_t sample,
                     std::uint64_t component) noexcept {
  const double u1 = uniform(s, sample, 2 * component + 2);
  const double u2 = uniform(s, sample, 2 * component + 3);
  return normal_from_uniforms(u1, u2);
}

}  // namespace rng
}  // namespace tylercov
