#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace dforge {

using Complex = std::complex<double>;

/// Periodic domain [0, L) sampled at N equispaced nodes.
///
/// Spectra are stored in half-complex form: coefficients for k = 0..N/2.
/// The forward transform carries the 1/N factor, so a spectrum coefficient is
/// the Fourier-series amplitude of the corresponding mode.
/// Copies share the underlying FFT plans and tables.
class SpectralGrid {
 public:
  SpectralGrid(double length, int n_modes);

  double length() const noexcept;
  int size() const noexcept;
  double spacing() const noexcept;
  int spectrum_size() const noexcept { return size() / 2 + 1; }

  /// ξ_k = 2πk/L for k = 0..N/2.
  std::span<const double> wavenumbers() const noexcept;
  /// x_i = i·h for i = 0..N-1.
  std::span<const double> nodes() const noexcept;
  /// Largest retained index under the 2/3 dealiasing rule.
  int dealias_cutoff() const noexcept;
  double max_wavenumber() const noexcept;

  void forward(std::span<const double> values, std::span<Complex> spectrum) const;
  void inverse(std::span<const Complex> spectrum, std::span<double> values) const;

  friend bool operator==(const SpectralGrid& a, const SpectralGrid& b) noexcept;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// A real periodic field with synchronized physical and spectral data.
class StateFunction {
 public:
  StateFunction(SpectralGrid grid, std::vector<double> values, double time = 0.0);

  static StateFunction from_spectrum(SpectralGrid grid, std::vector<Complex> spectrum,
                                     double time = 0.0);
  static StateFunction sample(SpectralGrid grid, const std::function<double(double)>& f,
                              double time = 0.0);
  static StateFunction constant(SpectralGrid grid, double c, double time = 0.0);

  const SpectralGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const Complex> spectrum() const noexcept { return spectrum_; }
  double time() const noexcept { return time_; }
  int size() const noexcept { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }

  StateFunction at_time(double t) const;
  double max_abs() const noexcept;
  double mean() const noexcept { return spectrum_[0].real(); }

 private:
  StateFunction(SpectralGrid grid, std::vector<double> values, std::vector<Complex> spectrum,
                double time);

  SpectralGrid grid_;
  std::vector<double> values_;
  std::vector<Complex> spectrum_;
  double time_;
};

StateFunction operator+(const StateFunction& a, const StateFunction& b);
StateFunction operator-(const StateFunction& a, const StateFunction& b);
StateFunction operator*(const StateFunction& a, const StateFunction& b);
StateFunction operator*(double c, const StateFunction& a);

/// Spectral derivative of order 0 ≤ j ≤ 12. Odd orders drop the Nyquist mode.
StateFunction derivative(const StateFunction& u, int order);

/// Derivative of the 2/3-dealiased spectrum; orders up to 16 are accepted.
StateFunction dealiased_derivative(const StateFunction& u, int order);

StateFunction dealias(const StateFunction& u);

/// ‖u‖_{H^s} with continuum normalization, L·Σ_k (1+ξ_k²)^s |û_k|² over all modes.
double sobolev_norm(const StateFunction& u, double s);
inline double l2_norm(const StateFunction& u) { return sobolev_norm(u, 0.0); }

/// Fraction of spectral energy carried by modes beyond the dealiasing cutoff.
double tail_energy_fraction(const StateFunction& u);

/// G(x) = slope·x + periodic(x), with G(0) = 0 and G' = g.
struct Antiderivative {
  StateFunction periodic;
  double slope = 0.0;

  std::vector<double> values() const;
  bool has_ramp(double tol = 1e-12) const;
  /// Values as a field; exact when there is no ramp, otherwise the ramp is sampled on [0, L).
  StateFunction as_field() const;
};

Antiderivative antiderivative_from_zero(const StateFunction& g);

struct InterpolationReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
};

/// ‖u‖_{H^{7+θ}} ≤ ‖u‖_{H^{11}}^{θ/4} ‖u‖_{H^7}^{1−θ/4}.
InterpolationReport check_interpolation(const StateFunction& u, double theta);

}  // namespace dforge
