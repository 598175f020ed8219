#include "dforge/mollify.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "dforge/errors.hpp"

namespace dforge {

namespace {

constexpr int kTableSize = 1025;

double rho(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

// Ψ(s) = ρ(s)/(ρ(s)+ρ(1−s)).
double psi(double s) {
  const double a = rho(s), b = rho(1.0 - s);
  return a / (a + b);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

BumpCutoff::BumpCutoff() : table_(kTableSize) {
  for (int i = 0; i < kTableSize; ++i) table_[i] = (*this)(1.0 + static_cast<double>(i) / (kTableSize - 1));
}

double BumpCutoff::operator()(double r) const {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  return psi(2.0 - r);
}

double BumpCutoff::complement(double r) const {
  if (r <= 1.0) return 0.0;
  if (r >= 2.0) return 1.0;
  return psi(r - 1.0);
}

double BumpCutoff::tabulated(double r) const {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double pos = (r - 1.0) * (kTableSize - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * table_[i] + w * table_[i + 1];
}

BumpCutoff build_bump() { return BumpCutoff(); }

MollifiedData mollify(const StateFunction& u0, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw ArgumentError("mollification scale must lie in (0, 1]");
  static const BumpCutoff phi;
  auto xi = u0.grid().wavenumbers();
  std::vector<Complex> spec(u0.spectrum().begin(), u0.spectrum().end());
  bool touched = false;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double w = phi(delta * xi[k]);
    if (w != 1.0) {
      spec[k] *= w;
      touched = true;
    }
  }
  if (!touched) return {u0, delta, u0};
  return {u0, delta, StateFunction::from_spectrum(u0.grid(), std::move(spec), u0.time())};
}

MollifierReport mollifier_report(const StateFunction& u0, const std::vector<double>& deltas) {
  if (deltas.empty()) throw ArgumentError("mollifier ladder is empty");
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1])) throw ArgumentError("mollifier ladder must be strictly decreasing");

  MollifierReport report;
  report.h7_original = sobolev_norm(u0, 7.0);
  std::vector<double> fit_x, fit_y;
  for (double delta : deltas) {
    const auto m = mollify(u0, delta);
    MollifierRow row;
    row.delta = delta;
    for (int j = 0; j <= 4; ++j) row.h[j] = sobolev_norm(m.result, 7.0 + j);
    const auto diff = m.result - u0;
    row.l2_diff = l2_norm(diff);
    row.h7_diff = sobolev_norm(diff, 7.0);
    row.l2_rate = row.h7_rate = std::numeric_limits<double>::quiet_NaN();
    if (!report.rows.empty()) {
      const auto& prev = report.rows.back();
      const double ld = std::log(prev.delta / delta);
      if (row.l2_diff > 0.0 && prev.l2_diff > 0.0) row.l2_rate = std::log(prev.l2_diff / row.l2_diff) / ld;
      if (row.h7_diff > 0.0 && prev.h7_diff > 0.0) row.h7_rate = std::log(prev.h7_diff / row.h7_diff) / ld;
    }
    if (row.l2_diff > 0.0) {
      fit_x.push_back(delta);
      fit_y.push_back(row.l2_diff);
    }
    report.rows.push_back(row);
  }
  report.fitted_l2_rate = loglog_slope(fit_x, fit_y);
  return report;
}

void MollifierReport::write_csv(std::ostream& os) const {
  os << "delta,h7,h8,h9,h10,h11,l2_diff,h7_diff\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.delta;
    for (double h : r.h) os << ',' << h;
    os << ',' << r.l2_diff << ',' << r.h7_diff << '\n';
  }
}

}  // namespace dforge
