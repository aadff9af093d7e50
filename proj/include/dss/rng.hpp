#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dss {

/// Seeded 64-bit Mersenne Twister. Independent streams for replications are
/// derived by mixing (seed, stream) through std::seed_seq.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

/// Laplace(rate) draw: random sign times Exp(rate).
inline double draw_laplace(Rng& rng, double rate) {
  std::exponential_distribution<double> expo(rate);
  std::bernoulli_distribution coin(0.5);
  const double mag = expo(rng);
  return coin(rng) ? mag : -mag;
}

inline double draw_normal(Rng& rng, double mean, double sd) {
  std::normal_distribution<double> n(mean, sd);
  return n(rng);
}

}  // namespace dss
