#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dforge/nonlinearity.hpp"
#include "dforge/spectral.hpp"

namespace dforge {

enum class Termination { reached_t_end, blowup_detected, dispersion_degenerate, step_underflow };
std::string to_string(Termination t);

/// Which linear part the integrating factor absorbs.
enum class StiffSplit {
  exact_hyperdiffusion,         ///< only −εξ⁴
  exact_hyperdiffusion_linear,  ///< −εξ⁴ plus the constant-coefficient linear part of f
};

struct SolverConfig {
  double epsilon = 0.0;
  double dt_init = 1e-3;
  double dt_min = 1e-12;
  double dt_max = 0.1;
  double t_end = 1.0;
  double safety = 0.9;
  double rtol = 1e-9;
  double atol = 1e-12;
  bool adaptive = true;
  /// ‖u‖_{H⁴} level treated as blow-up; defaults to 10³·‖u0‖_{H⁴}, or no guard for zero data.
  std::optional<double> blowup_threshold_H4;
  /// Snapshot spacing; 0 records every accepted step.
  double snapshot_interval = 0.0;
  /// Order n of w = ∂x^n u used for the gauge residual and energy-rate columns; 0 disables them.
  int monitor_order = 7;
  StiffSplit stiff_split = StiffSplit::exact_hyperdiffusion_linear;
  std::size_t max_steps = 50'000'000;
};

struct DiagnosticsRow {
  double t = 0.0;
  double l2 = 0.0, h4 = 0.0, h7 = 0.0, h8 = 0.0, h11 = 0.0;
  double lambda = 0.0;
  double k_of_t = 0.0;
  double m_eps = 0.0;
  double gauge_residual = std::numeric_limits<double>::quiet_NaN();
  double energy_rate = std::numeric_limits<double>::quiet_NaN();
};

struct DiagnosticsRecord {
  std::vector<DiagnosticsRow> rows;
  void write_csv(std::ostream& os) const;
};

struct Trajectory {
  std::string preset;
  double epsilon = 0.0;
  double delta = std::numeric_limits<double>::quiet_NaN();
  std::vector<StateFunction> snapshots;
  DiagnosticsRecord diagnostics;
  Termination termination = Termination::reached_t_end;
  bool degenerate_start = false;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;

  double final_time() const { return snapshots.empty() ? 0.0 : snapshots.back().time(); }
  const SpectralGrid& grid() const { return snapshots.front().grid(); }
};

struct StepResult {
  StateFunction state;
  double error_estimate;  // continuum L² norm of the embedded third-order difference
};

/// Coefficients c_0..c_3 absorbed by the integrating factor for this spec and state.
std::array<double, 4> frozen_linear_part(const NonlinearitySpec& spec, const StateFunction& u, StiffSplit split);

/// One integrating-factor RK4 step of u_t = f(∂x³u, …, u, x, t) − ε∂x⁴u.
StepResult step(const NonlinearitySpec& spec, const StateFunction& u, double dt, double epsilon,
                StiffSplit split = StiffSplit::exact_hyperdiffusion_linear);

Trajectory integrate(const NonlinearitySpec& spec, const StateFunction& u0, const SolverConfig& cfg);

/// ‖u‖_{H⁴} > threshold.
bool check_blowup(const StateFunction& u, double threshold);

/// Binary snapshot file (little-endian doubles, one row of N values per snapshot) plus JSON manifest.
void write_trajectory(const Trajectory& traj, const std::string& directory);
Trajectory read_trajectory(const std::string& directory);

}  // namespace dforge
