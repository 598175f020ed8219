#include "dforge/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "dforge/errors.hpp"

namespace dforge {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr unsigned kPlanFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

}  // namespace

struct SpectralGrid::Impl {
  double length;
  int n;
  double h;
  std::vector<double> xi;
  std::vector<double> x;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  Impl(double L, int N) : length(L), n(N), h(L / N), xi(N / 2 + 1), x(N) {
    for (int k = 0; k <= N / 2; ++k) xi[k] = 2.0 * std::numbers::pi * k / L;
    for (int i = 0; i < N; ++i) x[i] = i * h;

    std::vector<double> rbuf(N);
    std::vector<Complex> cbuf(N / 2 + 1);
    auto* cptr = reinterpret_cast<fftw_complex*>(cbuf.data());
    std::lock_guard lock(planner_mutex());
    r2c = fftw_plan_dft_r2c_1d(N, rbuf.data(), cptr, kPlanFlags);
    c2r = fftw_plan_dft_c2r_1d(N, cptr, rbuf.data(), kPlanFlags);
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
  }

  Impl(const Impl&) = delete;
  Impl& operator=(const Impl&) = delete;
};

SpectralGrid::SpectralGrid(double length, int n_modes) {
  if (!(length > 0.0) || !std::isfinite(length)) throw ArgumentError("grid length must be positive");
  if (n_modes < 8 || n_modes % 2 != 0) throw ArgumentError("grid size must be even and at least 8");
  impl_ = std::make_shared<const Impl>(length, n_modes);
}

double SpectralGrid::length() const noexcept { return impl_->length; }
int SpectralGrid::size() const noexcept { return impl_->n; }
double SpectralGrid::spacing() const noexcept { return impl_->h; }
std::span<const double> SpectralGrid::wavenumbers() const noexcept { return impl_->xi; }
std::span<const double> SpectralGrid::nodes() const noexcept { return impl_->x; }
int SpectralGrid::dealias_cutoff() const noexcept { return impl_->n / 3; }
double SpectralGrid::max_wavenumber() const noexcept { return impl_->xi.back(); }

void SpectralGrid::forward(std::span<const double> values, std::span<Complex> spectrum) const {
  const int n = impl_->n;
  fftw_execute_dft_r2c(impl_->r2c, const_cast<double*>(values.data()),
                       reinterpret_cast<fftw_complex*>(spectrum.data()));
  const double scale = 1.0 / n;
  for (auto& c : spectrum) c *= scale;
}

void SpectralGrid::inverse(std::span<const Complex> spectrum, std::span<double> values) const {
  // c2r overwrites its input.
  std::vector<Complex> scratch(spectrum.begin(), spectrum.end());
  scratch.front().imag(0.0);
  scratch.back().imag(0.0);
  fftw_execute_dft_c2r(impl_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), values.data());
}

bool operator==(const SpectralGrid& a, const SpectralGrid& b) noexcept {
  return a.impl_ == b.impl_ || (a.impl_->n == b.impl_->n && a.impl_->length == b.impl_->length);
}

StateFunction::StateFunction(SpectralGrid grid, std::vector<double> values, double time)
    : grid_(std::move(grid)), values_(std::move(values)), time_(time) {
  if (static_cast<int>(values_.size()) != grid_.size())
    throw ArgumentError("value array does not match grid size");
  spectrum_.resize(static_cast<std::size_t>(grid_.spectrum_size()));
  grid_.forward(values_, spectrum_);
}

StateFunction::StateFunction(SpectralGrid grid, std::vector<double> values,
                             std::vector<Complex> spectrum, double time)
    : grid_(std::move(grid)), values_(std::move(values)), spectrum_(std::move(spectrum)), time_(time) {}

StateFunction StateFunction::from_spectrum(SpectralGrid grid, std::vector<Complex> spectrum,
                                           double time) {
  if (static_cast<int>(spectrum.size()) != grid.spectrum_size())
    throw ArgumentError("spectrum array does not match grid size");
  spectrum.front().imag(0.0);
  spectrum.back().imag(0.0);
  std::vector<double> values(static_cast<std::size_t>(grid.size()));
  grid.inverse(spectrum, values);
  return StateFunction(std::move(grid), std::move(values), std::move(spectrum), time);
}

StateFunction StateFunction::sample(SpectralGrid grid, const std::function<double(double)>& f,
                                    double time) {
  std::vector<double> values(static_cast<std::size_t>(grid.size()));
  auto x = grid.nodes();
  std::transform(x.begin(), x.end(), values.begin(), f);
  return StateFunction(std::move(grid), std::move(values), time);
}

StateFunction StateFunction::constant(SpectralGrid grid, double c, double time) {
  std::vector<double> values(static_cast<std::size_t>(grid.size()), c);
  return StateFunction(std::move(grid), std::move(values), time);
}

StateFunction StateFunction::at_time(double t) const {
  return StateFunction(grid_, values_, spectrum_, t);
}

double StateFunction::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

template <class Op>
StateFunction combine(const StateFunction& a, const StateFunction& b, Op op) {
  if (!(a.grid() == b.grid())) throw ArgumentError("fields live on different grids");
  std::vector<double> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a.values()[i], b.values()[i]);
  return StateFunction(a.grid(), std::move(out), a.time());
}

Complex i_pow(int j) {
  switch (j % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

StateFunction derivative_impl(const StateFunction& u, int order, int cutoff, int max_order) {
  if (order < 0 || order > max_order)
    throw ArgumentError("derivative order must lie in [0, " + std::to_string(max_order) + "]");
  const auto& grid = u.grid();
  auto xi = grid.wavenumbers();
  auto in = u.spectrum();
  std::vector<Complex> out(in.size());
  const Complex ij = i_pow(order);
  const int nyquist = grid.size() / 2;
  for (int k = 0; k < static_cast<int>(out.size()); ++k) {
    if (k > cutoff || (k == nyquist && order % 2 == 1)) continue;
    out[k] = in[k] * ij * std::pow(xi[k], order);
  }
  if (order == 0 && cutoff >= nyquist) return u;
  return StateFunction::from_spectrum(grid, std::move(out), u.time());
}

}  // namespace

StateFunction operator+(const StateFunction& a, const StateFunction& b) {
  return combine(a, b, std::plus<>{});
}
StateFunction operator-(const StateFunction& a, const StateFunction& b) {
  return combine(a, b, std::minus<>{});
}
StateFunction operator*(const StateFunction& a, const StateFunction& b) {
  return combine(a, b, std::multiplies<>{});
}
StateFunction operator*(double c, const StateFunction& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v *= c;
  return StateFunction(a.grid(), std::move(out), a.time());
}

StateFunction derivative(const StateFunction& u, int order) {
  return derivative_impl(u, order, u.grid().size() / 2, 12);
}

StateFunction dealiased_derivative(const StateFunction& u, int order) {
  return derivative_impl(u, order, u.grid().dealias_cutoff(), 16);
}

StateFunction dealias(const StateFunction& u) { return dealiased_derivative(u, 0); }

double sobolev_norm(const StateFunction& u, double s) {
  if (s < 0.0 || std::isnan(s)) throw ArgumentError("Sobolev index must be nonnegative");
  auto xi = u.grid().wavenumbers();
  auto c = u.spectrum();
  const int half = u.grid().size() / 2;
  double sum = 0.0;
  for (int k = 0; k <= half; ++k) {
    const double w = (k == 0 || k == half) ? 1.0 : 2.0;
    const double weight = s == 0.0 ? 1.0 : std::pow(1.0 + xi[k] * xi[k], s);
    sum += w * weight * std::norm(c[k]);
  }
  return std::sqrt(u.grid().length() * sum);
}

double tail_energy_fraction(const StateFunction& u) {
  auto c = u.spectrum();
  const int half = u.grid().size() / 2;
  const int cut = u.grid().dealias_cutoff();
  double total = 0.0, tail = 0.0;
  for (int k = 0; k <= half; ++k) {
    const double e = ((k == 0 || k == half) ? 1.0 : 2.0) * std::norm(c[k]);
    total += e;
    if (k > cut) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

std::vector<double> Antiderivative::values() const {
  auto x = periodic.grid().nodes();
  std::vector<double> out(periodic.values().begin(), periodic.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += slope * x[i];
  return out;
}

bool Antiderivative::has_ramp(double tol) const { return std::abs(slope) > tol; }

StateFunction Antiderivative::as_field() const {
  return StateFunction(periodic.grid(), values(), periodic.time());
}

Antiderivative antiderivative_from_zero(const StateFunction& g) {
  const auto& grid = g.grid();
  auto xi = grid.wavenumbers();
  auto in = g.spectrum();
  const int half = grid.size() / 2;
  std::vector<Complex> out(in.size());
  for (int k = 1; k < half; ++k) out[k] = in[k] / Complex(0.0, xi[k]);
  auto p = StateFunction::from_spectrum(grid, std::move(out), g.time());
  std::vector<double> shifted(p.values().begin(), p.values().end());
  const double base = shifted[0];
  for (double& v : shifted) v -= base;
  return Antiderivative{StateFunction(grid, std::move(shifted), g.time()), g.mean()};
}

InterpolationReport check_interpolation(const StateFunction& u, double theta) {
  if (!(theta >= 0.0 && theta <= 4.0)) throw ArgumentError("interpolation parameter must lie in [0, 4]");
  InterpolationReport r;
  r.lhs = sobolev_norm(u, 7.0 + theta);
  const double h7 = sobolev_norm(u, 7.0);
  const double h11 = sobolev_norm(u, 11.0);
  r.rhs = std::pow(h11, theta / 4.0) * std::pow(h7, 1.0 - theta / 4.0);
  r.satisfied = r.lhs <= r.rhs * (1.0 + 1e-10);
  return r;
}

}  // namespace dforge
