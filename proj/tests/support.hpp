#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "dforge/spectral.hpp"

namespace dforge::testing {

inline constexpr double kPi = 3.14159265358979323846;

/// Real field with random coefficients on modes 1..kmax.
inline StateFunction band_limited(const SpectralGrid& g, int kmax, unsigned seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::vector<Complex> s(static_cast<std::size_t>(g.spectrum_size()));
  s[0] = scale * n01(rng);
  for (int k = 1; k <= kmax; ++k) s[static_cast<std::size_t>(k)] = scale * Complex(n01(rng), n01(rng)) / double(k * k);
  return StateFunction::from_spectrum(g, std::move(s));
}

inline double trapezoid_l2(const StateFunction& u) {
  double s = 0.0;
  for (double v : u.values()) s += v * v;
  return std::sqrt(s * u.grid().spacing());
}

inline double max_diff(const StateFunction& a, const StateFunction& b) { return (a - b).max_abs(); }

}  // namespace dforge::testing
