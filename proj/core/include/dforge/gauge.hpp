#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "dforge/coefficients.hpp"
#include "dforge/solver.hpp"

namespace dforge {

/// φ = √(a3/a3(0)) · exp(−∫₀ˣ a2/(3a3)), solving 6a3 φ' = (3a3' − 2a2) φ.
struct GaugeField {
  StateFunction phi;
  StateFunction a3, a2;
  double ode_residual = 0.0;
  /// Slope of the linear part of ∫₀ˣ a2/(3a3); nonzero means φ is not periodic.
  double ramp = 0.0;

  bool periodic(double tol = 1e-10) const;
  double min() const;
  double max() const;
};

GaugeField build_gauge(const StateFunction& a3, const StateFunction& a2);

/// Σ_{m ≤ i} ‖∂x^m a‖_{L^∞}.
double w_inf_norm(const StateFunction& a, int i);

struct CoefficientNorms {
  double k_G = 0.0;
  double M_tilde = 0.0;
};

/// k_G and M̃ of the linear problem. The time-derivative entries use (c − earlier)/dt_probe
/// and are zero when no earlier coefficients are given. A ramp in ∫a2/a3 gives k_G = M̃ = +∞.
CoefficientNorms coefficient_norms(const LinearizedCoefficients& c, const LinearizedCoefficients* earlier = nullptr,
                                   double dt_probe = 0.0);

struct EnergyRow {
  double t = 0.0;
  double v_l2 = 0.0;
  double w_l2 = 0.0;
  double h_l2 = 0.0;
  double dvdt = std::numeric_limits<double>::quiet_NaN();  // forward difference of ‖v‖²
  double rate_ratio = std::numeric_limits<double>::quiet_NaN();
  double c0_bound = 0.0;  // 2‖c0‖∞
  double eps_term = 0.0;  // −2ε⟨v, φ⁻¹∂x⁴(φv)⟩
  double k_G = 0.0;
  double M_tilde = 0.0;
  double M_eps = 0.0;
  double k = 0.0;
  double phi_min = 1.0, phi_max = 1.0;
  bool flagged = false;
};

struct EnergyLedger {
  int n = 0;
  bool gauged = true;
  std::vector<EnergyRow> rows;
  /// sup r(t) over rows with a defined rate.
  double sup_rate = std::numeric_limits<double>::quiet_NaN();
  /// ‖v(t)‖ ≤ e^{R⁺t}(‖v0‖ + ∫‖f̃‖) at every row, R = sup_rate.
  bool gronwall_holds = false;
  /// Largest ‖v(t)‖ / bound over rows.
  double gronwall_worst = 0.0;
  /// ‖v‖² ≤ E_k with E_{k+1} = E_k + R⁺Δt(E_k + √E_k h_k), E_0 = ‖v0‖².
  bool envelope_holds = false;
  std::size_t flagged_rows = 0;

  void write_csv(std::ostream& os) const;
};

struct LedgerOptions {
  /// With false, φ ≡ 1 and the ledger tracks the plain ‖w‖².
  bool gauged = true;
};

EnergyLedger gauged_energy_rate(const NonlinearitySpec& spec, const Trajectory& traj, int n,
                                LedgerOptions options = {});

struct SolutionNorms {
  std::vector<double> t;
  std::vector<double> m_eps;
  std::vector<double> k;
  /// ‖∂t u‖_{H⁴} by finite differences over snapshots, at snapshot times.
  std::vector<double> snapshot_t;
  std::vector<double> dt_u_h4;
};

SolutionNorms solution_norms(const Trajectory& traj);

}  // namespace dforge
