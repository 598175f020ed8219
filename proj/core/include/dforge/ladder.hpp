#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dforge/solver.hpp"

namespace dforge {

/// Pool size: DISPERSIVE_FORGE_THREADS if set, else `requested` if positive, else hardware concurrency.
unsigned worker_count(unsigned requested = 0);

/// Runs tasks[i]() on up to `workers` threads. Rethrows the first failure by index.
void run_parallel(const std::vector<std::function<void()>>& tasks, unsigned workers);

struct LadderConfig {
  std::vector<double> deltas;  // strictly decreasing in (0, 1]
  StateFunction u0;
  SolverConfig solver;  // epsilon is overwritten per rung by δ⁵
  std::optional<double> t_target;
  bool mollify_data = true;
  unsigned threads = 0;
};

struct ResidualPoint {
  double t = 0.0;
  double value = 0.0;
};

struct RungReport {
  double delta = 0.0;
  double epsilon = 0.0;
  double final_time = 0.0;
  Termination termination = Termination::reached_t_end;
  double m_eps = 0.0;   // M_ε at the common time
  double k = 0.0;       // k at the common time
  double h11_sup = 0.0;
  double h11_delta4 = 0.0;
  double dx4_sup = 0.0;  // sup ‖∂x⁴u‖_{L²} over the window
  double residual_eps_sup = 0.0;
  double residual_zero_sup = 0.0;
  Trajectory trajectory;
};

struct LadderReport {
  std::string preset;
  double common_time = 0.0;
  std::vector<RungReport> rungs;
  /// Symmetric tables of sup over common snapshot times of ‖u_i − u_j‖_{H³}, ‖u_i − u_j‖_{H⁷}.
  std::vector<std::vector<double>> pairwise_h3, pairwise_h7;
  std::vector<ResidualPoint> finest_residual_eps, finest_residual_zero;
  std::optional<StateFunction> extrapolated;
  std::vector<ResidualPoint> extrapolated_residual;

  bool cauchy_decreasing = true;
  bool h11_bounded = true;
  bool residual_shrinking = true;
  /// residual_zero_sup / (ε·dx4_sup) per rung.
  std::vector<double> residual_proportionality;

  bool contracts_hold() const { return cauchy_decreasing && h11_bounded && residual_shrinking; }
  void write_json(std::ostream& os) const;
  void write_rungs_csv(std::ostream& os) const;
  void write_pairwise_csv(std::ostream& os) const;
};

LadderReport run_ladder(const NonlinearitySpec& spec, const LadderConfig& cfg);

/// ‖∂t u − f(u) + ε_used ∂x⁴u‖_{L²} per snapshot. ∂t u comes from 5-point differences of the
/// snapshots in the frame that removes the constant-coefficient linear part of f.
std::vector<ResidualPoint> pde_residual(const NonlinearitySpec& spec, const Trajectory& traj, double eps_used);

/// u_f + (u_f − u_c)·ε_f/(ε_c − ε_f).
StateFunction richardson_extrapolate(const StateFunction& coarse, double eps_coarse, const StateFunction& fine,
                                     double eps_fine);

struct DependenceRow {
  double data_diff_h7 = 0.0;
  double solution_diff_h7 = 0.0;  // sup over common snapshot times
  double ratio = 0.0;
  bool bitwise_identical = false;
};

/// Solves from (u0)_δ and from (u0 + p)_δ for every perturbation p with ε = δ⁵.
std::vector<DependenceRow> continuous_dependence_probe(const NonlinearitySpec& spec, const StateFunction& u0,
                                                       const std::vector<StateFunction>& perturbations, double delta,
                                                       const SolverConfig& solver, unsigned threads = 0);

struct RegularizationDifference {
  double eps_a = 0.0, eps_b = 0.0;
  double h3_diff = 0.0;
  double constant = 0.0;  // h3_diff / (eps_a + eps_b)
};

/// Same data, different ε: sup ‖u_a − u_b‖_{H³} for consecutive entries of `epsilons`.
std::vector<RegularizationDifference> regularization_difference(const NonlinearitySpec& spec, const StateFunction& u0,
                                                                const std::vector<double>& epsilons,
                                                                const SolverConfig& solver, unsigned threads = 0);

/// Largest t with sup_{s ≤ t} ‖u_a − u_b‖_{H³} ≤ c·(ε_a + ε_b) for both trajectories' common snapshot times.
double difference_window(const Trajectory& a, const Trajectory& b, double c);

bool bitwise_equal(const Trajectory& a, const Trajectory& b);

}  // namespace dforge
