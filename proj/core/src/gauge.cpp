#include "dforge/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include "dforge/errors.hpp"

namespace dforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

StateFunction pointwise(const StateFunction& a, double (*fn)(double)) {
  std::vector<double> v(a.values().begin(), a.values().end());
  for (double& x : v) x = fn(x);
  return StateFunction(a.grid(), std::move(v), a.time());
}

StateFunction quotient(const StateFunction& a, const StateFunction& b) {
  std::vector<double> v(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] /= b.values()[i];
  return StateFunction(a.grid(), std::move(v), a.time());
}

double inner(const StateFunction& a, const StateFunction& b) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid().spacing();
}

void check_coefficient(const StateFunction& a3) {
  const double s = a3[0];
  for (int i = 0; i < a3.size(); ++i) {
    if (std::abs(a3[i]) < 1e-12) throw DegeneracyError("leading coefficient vanishes on the grid");
    if ((a3[i] > 0) != (s > 0)) throw DegeneracyError("leading coefficient changes sign");
  }
}

}  // namespace

bool GaugeField::periodic(double tol) const { return std::abs(ramp) <= tol; }

double GaugeField::min() const { return *std::min_element(phi.values().begin(), phi.values().end()); }

double GaugeField::max() const { return *std::max_element(phi.values().begin(), phi.values().end()); }

GaugeField build_gauge(const StateFunction& a3, const StateFunction& a2) {
  if (!(a3.grid() == a2.grid())) throw ArgumentError("gauge coefficients live on different grids");
  check_coefficient(a3);
  const auto ratio = (1.0 / 3.0) * quotient(a2, a3);
  const auto prim = antiderivative_from_zero(ratio);
  const auto P = prim.values();
  const int n = a3.size();
  const double a30 = a3[0];
  std::vector<double> phi(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) phi[static_cast<std::size_t>(i)] = std::sqrt(a3[i] / a30) * std::exp(-P[static_cast<std::size_t>(i)]);

  // φ' from the spectral derivatives of ln|a3| and of the periodic part of the primitive.
  const auto dlog = derivative(pointwise(a3, [](double x) { return std::log(std::abs(x)); }), 1);
  const auto dper = derivative(prim.periodic, 1);
  const auto da3 = derivative(a3, 1);
  double res = 0.0, pmax = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = phi[static_cast<std::size_t>(i)];
    const double dphi = p * (0.5 * dlog[i] - prim.slope - dper[i]);
    res = std::max(res, std::abs(6.0 * a3[i] * dphi - (3.0 * da3[i] - 2.0 * a2[i]) * p));
    pmax = std::max(pmax, std::abs(p));
  }
  GaugeField g{StateFunction(a3.grid(), std::move(phi), a3.time()), a3, a2, res / pmax, prim.slope};
  return g;
}

double w_inf_norm(const StateFunction& a, int i) {
  if (i < 0) throw ArgumentError("Sobolev index must be nonnegative");
  double s = a.max_abs();
  for (int m = 1; m <= i; ++m) s += derivative(a, m).max_abs();
  return s;
}

CoefficientNorms coefficient_norms(const LinearizedCoefficients& c, const LinearizedCoefficients* earlier,
                                   double dt_probe) {
  check_coefficient(c.a3);
  const auto prim = antiderivative_from_zero(quotient(c.a2, c.a3));
  if (prim.has_ramp()) return {kInf, kInf};
  const double inv = pointwise(c.a3, [](double x) { return 1.0 / x; }).max_abs();
  CoefficientNorms out;
  out.k_G = prim.periodic.max_abs() + inv + c.a3.max_abs();
  out.M_tilde = w_inf_norm(c.a0, 0) + w_inf_norm(c.a1, 1) + w_inf_norm(c.a2, 2) + w_inf_norm(c.a3, 3) + inv +
                prim.periodic.max_abs();
  if (earlier && dt_probe != 0.0) {
    const auto prev = antiderivative_from_zero(quotient(earlier->a2, earlier->a3));
    if (prev.has_ramp()) return {kInf, kInf};
    out.M_tilde += (prim.periodic - prev.periodic).max_abs() / std::abs(dt_probe);
    out.M_tilde += (c.a3 - earlier->a3).max_abs() / std::abs(dt_probe);
  }
  return out;
}

EnergyLedger gauged_energy_rate(const NonlinearitySpec& spec, const Trajectory& traj, int n, LedgerOptions options) {
  if (n < 3 || n > 11) throw ArgumentError("ledger order must lie in 3..11");
  const auto& snaps = traj.snapshots;
  if (snaps.size() < 3) throw ArgumentError("energy ledger needs at least 3 snapshots");
  const std::size_t count = snaps.size();

  std::vector<LinearizedCoefficients> coeffs;
  coeffs.reserve(count);
  for (const auto& u : snaps) coeffs.push_back(linearized_coefficients(spec, u, n, traj.epsilon));

  const auto norms = solution_norms(traj);
  auto norms_at = [&](double t, double& m_eps, double& k) {
    auto it = std::upper_bound(norms.t.begin(), norms.t.end(), t);
    const std::size_t idx = it == norms.t.begin() ? 0 : static_cast<std::size_t>(it - norms.t.begin()) - 1;
    m_eps = norms.m_eps.empty() ? 0.0 : norms.m_eps[idx];
    k = norms.k.empty() ? 0.0 : norms.k[idx];
  };

  EnergyLedger L;
  L.n = n;
  L.gauged = options.gauged;
  L.rows.resize(count);
  std::vector<std::optional<GaugeField>> gauges(count);
  for (std::size_t s = 0; s < count; ++s) {
    if (!options.gauged) continue;
    try {
      gauges[s] = build_gauge(coeffs[s].a3, coeffs[s].a2);
      if (!gauges[s]->periodic()) gauges[s].reset();
    } catch (const DegeneracyError&) {
    }
  }

  for (std::size_t s = 0; s < count; ++s) {
    const auto& u = snaps[s];
    const auto& c = coeffs[s];
    auto& row = L.rows[s];
    row.t = u.time();
    const auto w = derivative(u, n);
    auto phi = StateFunction::constant(u.grid(), 1.0, u.time());
    if (options.gauged) {
      if (gauges[s]) phi = gauges[s]->phi;
      else row.flagged = true;
    }
    const auto v = quotient(w, phi);
    row.w_l2 = l2_norm(w);
    row.v_l2 = l2_norm(v);
    row.h_l2 = l2_norm(c.remainder);
    row.phi_min = *std::min_element(phi.values().begin(), phi.values().end());
    row.phi_max = *std::max_element(phi.values().begin(), phi.values().end());

    // ln φ time derivative from neighbouring snapshots.
    StateFunction logphi_t = StateFunction::constant(u.grid(), 0.0, u.time());
    if (options.gauged && !row.flagged) {
      const std::size_t lo = s == 0 ? 0 : s - 1, hi = s + 1 == count ? s : s + 1;
      if (gauges[lo] && gauges[hi] && hi > lo) {
        auto lp = [](const GaugeField& g) { return pointwise(g.phi, [](double x) { return std::log(x); }); };
        logphi_t = (1.0 / (snaps[hi].time() - snaps[lo].time())) * (lp(*gauges[hi]) - lp(*gauges[lo]));
      }
    }
    // c0 uses the coefficients of ∂t w + Σ a_i ∂x^i w = …, i.e. the negated ones.
    const auto d1 = quotient(derivative(phi, 1), phi), d2 = quotient(derivative(phi, 2), phi),
               d3 = quotient(derivative(phi, 3), phi);
    const auto a3 = -1.0 * c.a3, a2 = -1.0 * c.a2, a1 = -1.0 * c.a1, a0 = -1.0 * c.a0;
    const auto b3 = a3;
    const auto b2 = a2 + 3.0 * (a3 * d1);
    const auto b1 = a1 + 2.0 * (a2 * d1) + 3.0 * (a3 * d2);
    const auto b0 = a0 + a1 * d1 + a2 * d2 + a3 * d3 + logphi_t;
    const auto c0 = b0 - 0.5 * (derivative(b1, 1) - derivative(b2, 2) + derivative(b3, 3));
    row.c0_bound = 2.0 * c0.max_abs();
    row.eps_term = -2.0 * traj.epsilon * inner(v, quotient(derivative(w, 4), phi));

    if (options.gauged && row.flagged) {
      row.k_G = row.M_tilde = kInf;
    } else {
      const LinearizedCoefficients* other = count > 1 ? &coeffs[s == 0 ? 1 : s - 1] : nullptr;
      const double dt = other ? u.time() - snaps[s == 0 ? 1 : s - 1].time() : 0.0;
      try {
        const auto cn = coefficient_norms(c, other, dt);
        row.k_G = cn.k_G;
        row.M_tilde = cn.M_tilde;
      } catch (const DegeneracyError&) {
        row.k_G = row.M_tilde = kInf;
      }
    }
    norms_at(row.t, row.M_eps, row.k);
  }

  for (std::size_t s = 0; s + 1 < count; ++s) {
    auto& row = L.rows[s];
    const double dt = L.rows[s + 1].t - row.t;
    const double y0 = row.v_l2 * row.v_l2, y1 = L.rows[s + 1].v_l2 * L.rows[s + 1].v_l2;
    row.dvdt = (y1 - y0) / dt;
    const double denom = y0 + row.v_l2 * row.h_l2;
    if (denom > 0.0) row.rate_ratio = row.dvdt / denom;
  }

  double sup = -kInf;
  for (const auto& r : L.rows) {
    if (r.flagged) ++L.flagged_rows;
    else if (std::isfinite(r.rate_ratio)) sup = std::max(sup, r.rate_ratio);
  }
  L.sup_rate = sup == -kInf ? std::numeric_limits<double>::quiet_NaN() : sup;
  const double R = std::isfinite(L.sup_rate) ? std::max(L.sup_rate, 0.0) : 0.0;

  L.gronwall_holds = L.envelope_holds = true;
  L.gronwall_worst = 0.0;
  const double t0 = L.rows.front().t, v0 = L.rows.front().v_l2;
  double forcing = 0.0, E = v0 * v0;
  for (std::size_t s = 0; s < count; ++s) {
    const auto& r = L.rows[s];
    if (s > 0) {
      const auto& p = L.rows[s - 1];
      const double dt = r.t - p.t;
      forcing += p.h_l2 * dt;
      E += R * dt * (E + std::sqrt(E) * p.h_l2);
    }
    const double bound = std::exp(R * (r.t - t0)) * (v0 + forcing);
    const double ratio = bound > 0.0 ? r.v_l2 / bound : (r.v_l2 > 0.0 ? kInf : 0.0);
    L.gronwall_worst = std::max(L.gronwall_worst, ratio);
    if (r.v_l2 > bound * (1.0 + 1e-12)) L.gronwall_holds = false;
    if (r.v_l2 * r.v_l2 > E * (1.0 + 1e-12)) L.envelope_holds = false;
  }
  return L;
}

void EnergyLedger::write_csv(std::ostream& os) const {
  os << "t,v_l2,w_l2,h_l2,dvdt,rate_ratio,c0_bound,eps_term,k_G,M_tilde,M_eps,k,phi_min,phi_max,flagged\n";
  os.precision(17);
  for (const auto& r : rows)
    os << r.t << ',' << r.v_l2 << ',' << r.w_l2 << ',' << r.h_l2 << ',' << r.dvdt << ',' << r.rate_ratio << ','
       << r.c0_bound << ',' << r.eps_term << ',' << r.k_G << ',' << r.M_tilde << ',' << r.M_eps << ',' << r.k << ','
       << r.phi_min << ',' << r.phi_max << ',' << (r.flagged ? 1 : 0) << '\n';
}

SolutionNorms solution_norms(const Trajectory& traj) {
  if (traj.snapshots.empty()) throw ArgumentError("trajectory is empty");
  SolutionNorms out;
  for (const auto& r : traj.diagnostics.rows) {
    out.t.push_back(r.t);
    out.m_eps.push_back(r.m_eps);
    out.k.push_back(r.k_of_t);
  }
  if (out.t.empty()) {
    double h7 = 0.0, h8 = 0.0, k = 0.0;
    for (const auto& u : traj.snapshots) {
      h7 = std::max(h7, sobolev_norm(u, 7.0));
      h8 = std::max(h8, sobolev_norm(u, 8.0));
      k = std::max(k, sobolev_norm(u, 4.0));
      out.t.push_back(u.time());
      out.m_eps.push_back(h7 + traj.epsilon * h8);
      out.k.push_back(k);
    }
  }
  const auto& s = traj.snapshots;
  if (s.size() >= 2) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1, hi = i + 1 == s.size() ? i : i + 1;
      out.snapshot_t.push_back(s[i].time());
      out.dt_u_h4.push_back(sobolev_norm(s[hi] - s[lo], 4.0) / (s[hi].time() - s[lo].time()));
    }
  }
  return out;
}

}  // namespace dforge
