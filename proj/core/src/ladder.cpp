#include "dforge/ladder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "dforge/errors.hpp"
#include "dforge/mollify.hpp"

namespace dforge {

using nlohmann::json;

unsigned worker_count(unsigned requested) {
  if (const char* env = std::getenv("DISPERSIVE_FORGE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void run_parallel(const std::vector<std::function<void()>>& tasks, unsigned workers) {
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(drain);
  drain();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

const StateFunction* find_snapshot(const Trajectory& tr, double t) {
  auto it = std::lower_bound(tr.snapshots.begin(), tr.snapshots.end(), t - 1e-12 * std::max(1.0, std::abs(t)),
                             [](const StateFunction& s, double v) { return s.time() < v; });
  if (it != tr.snapshots.end() && same_time(it->time(), t)) return &*it;
  return nullptr;
}

/// sup over common snapshot times t ≤ T of ‖a − b‖_{H^s}.
double sup_difference(const Trajectory& a, const Trajectory& b, double s, double T) {
  double sup = 0.0;
  for (const auto& ua : a.snapshots) {
    if (ua.time() > T * (1 + 1e-12) + 1e-300) break;
    if (const auto* ub = find_snapshot(b, ua.time())) sup = std::max(sup, sobolev_norm(ua - *ub, s));
  }
  return sup;
}

Trajectory truncate(const Trajectory& tr, double T) {
  Trajectory out = tr;
  out.snapshots.clear();
  for (const auto& s : tr.snapshots)
    if (s.time() <= T * (1 + 1e-12) + 1e-300) out.snapshots.push_back(s);
  out.diagnostics.rows.clear();
  for (const auto& r : tr.diagnostics.rows)
    if (r.t <= T * (1 + 1e-12) + 1e-300) out.diagnostics.rows.push_back(r);
  return out;
}

double sup_value(const std::vector<ResidualPoint>& r) {
  double s = 0.0;
  for (const auto& p : r) s = std::max(s, p.value);
  return s;
}

Trajectory solve_or_stall(const NonlinearitySpec& spec, const StateFunction& data, const SolverConfig& cfg) {
  try {
    return integrate(spec, data, cfg);
  } catch (const DegeneracyError&) {
  } catch (const EvaluationError&) {
  }
  Trajectory tr;
  tr.preset = spec.name();
  tr.epsilon = cfg.epsilon;
  tr.snapshots.push_back(data);
  tr.termination = Termination::dispersion_degenerate;
  return tr;
}

/// Weights of the derivative at t of the interpolant through the nodes.
std::vector<double> derivative_weights(const std::vector<double>& nodes, double t) {
  const std::size_t m = nodes.size();
  std::vector<double> w(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double denom = 1.0;
    for (std::size_t l = 0; l < m; ++l)
      if (l != j) denom *= nodes[j] - nodes[l];
    double num = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == j) continue;
      double p = 1.0;
      for (std::size_t l = 0; l < m; ++l)
        if (l != j && l != k) p *= t - nodes[l];
      num += p;
    }
    w[j] = num / denom;
  }
  return w;
}

}  // namespace

std::vector<ResidualPoint> pde_residual(const NonlinearitySpec& spec, const Trajectory& traj, double eps_used) {
  const auto& snaps = traj.snapshots;
  if (snaps.size() < 5) throw ArgumentError("PDE residual needs at least 5 snapshots");
  const auto& grid = snaps.front().grid();
  const std::size_t m = static_cast<std::size_t>(grid.spectrum_size());
  const std::size_t nyq = m - 1;
  auto xi = grid.wavenumbers();

  const auto c = frozen_linear_part(spec, snaps.front(), StiffSplit::exact_hyperdiffusion_linear);
  std::vector<Complex> P(m);
  for (std::size_t k = 0; k < m; ++k) {
    Complex ik = 1.0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (!(k == nyq && j % 2 == 1)) P[k] += c[j] * ik;
      ik *= Complex(0.0, xi[k]);
    }
  }
  // Interaction-frame coefficients v = e^{−tP} û vary only on the nonlinear time scale.
  std::vector<std::vector<Complex>> v(snaps.size(), std::vector<Complex>(m));
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    auto uh = snaps[s].spectrum();
    for (std::size_t k = 0; k < m; ++k) v[s][k] = std::exp(-snaps[s].time() * P[k]) * uh[k];
  }

  std::vector<ResidualPoint> out;
  out.reserve(snaps.size());
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    const std::size_t lo = std::min(s >= 2 ? s - 2 : 0, snaps.size() - 5);
    std::vector<double> nodes(5);
    for (std::size_t j = 0; j < 5; ++j) nodes[j] = snaps[lo + j].time();
    const auto w = derivative_weights(nodes, snaps[s].time());
    const auto rhs = evaluate_rhs(spec, snaps[s]);
    const auto f = rhs.spectrum();
    auto uh = snaps[s].spectrum();
    const double t = snaps[s].time();
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      Complex dv = 0.0;
      for (std::size_t j = 0; j < 5; ++j) dv += w[j] * v[lo + j][k];
      const Complex dudt = std::exp(t * P[k]) * dv + P[k] * uh[k];
      const double x4 = xi[k] * xi[k] * xi[k] * xi[k];
      const Complex r = dudt - f[k] + eps_used * x4 * uh[k];
      acc += ((k == 0 || k == nyq) ? 1.0 : 2.0) * std::norm(r);
    }
    out.push_back({t, std::sqrt(grid.length() * acc)});
  }
  return out;
}

StateFunction richardson_extrapolate(const StateFunction& coarse, double eps_coarse, const StateFunction& fine,
                                     double eps_fine) {
  if (!(eps_coarse > eps_fine)) throw ArgumentError("extrapolation needs eps_coarse > eps_fine");
  const auto out = fine + (eps_fine / (eps_coarse - eps_fine)) * (fine - coarse);
  return out.at_time(fine.time());
}

LadderReport run_ladder(const NonlinearitySpec& spec, const LadderConfig& cfg) {
  if (cfg.deltas.empty()) throw ArgumentError("ladder has no rungs");
  for (std::size_t i = 0; i < cfg.deltas.size(); ++i) {
    const double d = cfg.deltas[i];
    if (!(d > 0.0 && d <= 1.0)) throw ArgumentError("ladder deltas must lie in (0, 1]");
    if (i > 0 && !(d < cfg.deltas[i - 1])) throw ArgumentError("ladder deltas must be strictly decreasing");
  }
  const std::size_t R = cfg.deltas.size();
  LadderReport rep;
  rep.preset = spec.name();
  rep.rungs.resize(R);

  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < R; ++i) {
    tasks.emplace_back([&, i] {
      auto& rung = rep.rungs[i];
      rung.delta = cfg.deltas[i];
      rung.epsilon = std::pow(rung.delta, 5);
      SolverConfig sc = cfg.solver;
      sc.epsilon = rung.epsilon;
      if (cfg.t_target) sc.t_end = std::min(sc.t_end, *cfg.t_target);
      const auto data = cfg.mollify_data ? mollify(cfg.u0, rung.delta).result : cfg.u0;
      rung.trajectory = solve_or_stall(spec, data, sc);
      rung.trajectory.delta = rung.delta;
      rung.final_time = rung.trajectory.final_time();
      rung.termination = rung.trajectory.termination;
    });
  }
  run_parallel(tasks, worker_count(cfg.threads));

  const double t0 = cfg.u0.time();
  double T = std::numeric_limits<double>::infinity();
  for (const auto& r : rep.rungs) T = std::min(T, r.final_time);
  if (!(T > t0)) throw HarnessError("no rung advanced beyond the initial time");
  rep.common_time = T;

  for (auto& r : rep.rungs) {
    const auto tr = truncate(r.trajectory, T);
    for (const auto& s : tr.snapshots) {
      r.h11_sup = std::max(r.h11_sup, sobolev_norm(s, 11.0));
      r.dx4_sup = std::max(r.dx4_sup, l2_norm(derivative(s, 4)));
    }
    r.h11_delta4 = std::pow(r.delta, 4) * r.h11_sup;
    if (!tr.diagnostics.rows.empty()) {
      r.m_eps = tr.diagnostics.rows.back().m_eps;
      r.k = tr.diagnostics.rows.back().k_of_t;
    }
    if (tr.snapshots.size() >= 5) {
      r.residual_eps_sup = sup_value(pde_residual(spec, tr, r.epsilon));
      r.residual_zero_sup = sup_value(pde_residual(spec, tr, 0.0));
    } else {
      r.residual_eps_sup = r.residual_zero_sup = std::numeric_limits<double>::quiet_NaN();
    }
    rep.residual_proportionality.push_back(r.residual_zero_sup / (r.epsilon * r.dx4_sup));
  }

  rep.pairwise_h3.assign(R, std::vector<double>(R, 0.0));
  rep.pairwise_h7.assign(R, std::vector<double>(R, 0.0));
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = i + 1; j < R; ++j) {
      const auto& a = rep.rungs[i].trajectory;
      const auto& b = rep.rungs[j].trajectory;
      rep.pairwise_h3[i][j] = rep.pairwise_h3[j][i] = sup_difference(a, b, 3.0, T);
      rep.pairwise_h7[i][j] = rep.pairwise_h7[j][i] = sup_difference(a, b, 7.0, T);
    }

  const auto finest = truncate(rep.rungs.back().trajectory, T);
  if (finest.snapshots.size() >= 5) {
    rep.finest_residual_eps = pde_residual(spec, finest, rep.rungs.back().epsilon);
    rep.finest_residual_zero = pde_residual(spec, finest, 0.0);
  }
  if (R >= 2) {
    const auto& coarse = rep.rungs[R - 2];
    Trajectory ex;
    ex.preset = spec.name();
    for (const auto& s : finest.snapshots)
      if (const auto* c = find_snapshot(coarse.trajectory, s.time()))
        ex.snapshots.push_back(richardson_extrapolate(*c, coarse.epsilon, s, rep.rungs.back().epsilon));
    if (!ex.snapshots.empty()) rep.extrapolated = ex.snapshots.back();
    if (ex.snapshots.size() >= 5) rep.extrapolated_residual = pde_residual(spec, ex, 0.0);
  }

  for (std::size_t i = 0; i + 2 < R; ++i)
    if (!(rep.pairwise_h3[i + 1][i + 2] < rep.pairwise_h3[i][i + 1])) rep.cauchy_decreasing = false;
  for (std::size_t i = 0; i + 1 < R; ++i) {
    if (!(rep.rungs[i + 1].h11_delta4 <= rep.rungs[i].h11_delta4 * (1.0 + 1e-9))) rep.h11_bounded = false;
    if (!(rep.rungs[i + 1].residual_zero_sup < rep.rungs[i].residual_zero_sup)) rep.residual_shrinking = false;
  }
  if (R >= 2)
    for (double p : rep.residual_proportionality)
      if (!(p >= 0.5 && p <= 2.0)) rep.residual_shrinking = false;
  return rep;
}

void LadderReport::write_json(std::ostream& os) const {
  json j;
  j["preset"] = preset;
  j["common_time"] = common_time;
  json rs = json::array();
  for (std::size_t i = 0; i < rungs.size(); ++i) {
    const auto& r = rungs[i];
    rs.push_back({{"delta", r.delta},
                  {"epsilon", r.epsilon},
                  {"final_time", r.final_time},
                  {"termination", to_string(r.termination)},
                  {"m_eps", finite_or_null(r.m_eps)},
                  {"k", finite_or_null(r.k)},
                  {"h11_sup", finite_or_null(r.h11_sup)},
                  {"h11_delta4", finite_or_null(r.h11_delta4)},
                  {"dx4_sup", finite_or_null(r.dx4_sup)},
                  {"residual_eps_sup", finite_or_null(r.residual_eps_sup)},
                  {"residual_zero_sup", finite_or_null(r.residual_zero_sup)},
                  {"residual_proportionality", finite_or_null(residual_proportionality[i])}});
  }
  j["rungs"] = rs;
  j["pairwise_h3"] = pairwise_h3;
  j["pairwise_h7"] = pairwise_h7;
  auto series = [](const std::vector<ResidualPoint>& r) {
    json a = json::array();
    for (const auto& p : r) a.push_back({p.t, finite_or_null(p.value)});
    return a;
  };
  j["finest_residual_eps"] = series(finest_residual_eps);
  j["finest_residual_zero"] = series(finest_residual_zero);
  j["extrapolated_residual"] = series(extrapolated_residual);
  j["cauchy_decreasing"] = cauchy_decreasing;
  j["h11_bounded"] = h11_bounded;
  j["residual_shrinking"] = residual_shrinking;
  os << j.dump(2) << '\n';
}

void LadderReport::write_rungs_csv(std::ostream& os) const {
  os << "delta,epsilon,final_time,termination,m_eps,k,h11_sup,h11_delta4,dx4_sup,residual_eps_sup,residual_zero_sup\n";
  os.precision(17);
  for (const auto& r : rungs)
    os << r.delta << ',' << r.epsilon << ',' << r.final_time << ',' << to_string(r.termination) << ',' << r.m_eps << ','
       << r.k << ',' << r.h11_sup << ',' << r.h11_delta4 << ',' << r.dx4_sup << ',' << r.residual_eps_sup << ','
       << r.residual_zero_sup << '\n';
}

void LadderReport::write_pairwise_csv(std::ostream& os) const {
  os << "delta_i,delta_j,h3,h7\n";
  os.precision(17);
  for (std::size_t i = 0; i < rungs.size(); ++i)
    for (std::size_t j = i + 1; j < rungs.size(); ++j)
      os << rungs[i].delta << ',' << rungs[j].delta << ',' << pairwise_h3[i][j] << ',' << pairwise_h7[i][j] << '\n';
}

bool bitwise_equal(const Trajectory& a, const Trajectory& b) {
  if (a.snapshots.size() != b.snapshots.size()) return false;
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    const auto& x = a.snapshots[i];
    const auto& y = b.snapshots[i];
    const double tx = x.time(), ty = y.time();
    if (std::memcmp(&tx, &ty, sizeof(double)) != 0 || x.size() != y.size()) return false;
    if (std::memcmp(x.values().data(), y.values().data(), x.values().size() * sizeof(double)) != 0) return false;
  }
  return true;
}

std::vector<DependenceRow> continuous_dependence_probe(const NonlinearitySpec& spec, const StateFunction& u0,
                                                       const std::vector<StateFunction>& perturbations, double delta,
                                                       const SolverConfig& solver, unsigned threads) {
  if (!(delta > 0.0 && delta <= 1.0)) throw ArgumentError("delta must lie in (0, 1]");
  SolverConfig sc = solver;
  sc.epsilon = std::pow(delta, 5);
  const std::size_t n = perturbations.size();
  std::vector<StateFunction> data;
  data.push_back(mollify(u0, delta).result);
  for (const auto& p : perturbations) data.push_back(mollify(u0 + p, delta).result);
  std::vector<Trajectory> runs(n + 1);
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i <= n; ++i) tasks.emplace_back([&, i] { runs[i] = solve_or_stall(spec, data[i], sc); });
  run_parallel(tasks, worker_count(threads));

  std::vector<DependenceRow> rows;
  for (std::size_t i = 1; i <= n; ++i) {
    DependenceRow r;
    r.data_diff_h7 = sobolev_norm(data[i] - data[0], 7.0);
    const double T = std::min(runs[0].final_time(), runs[i].final_time());
    r.solution_diff_h7 = sup_difference(runs[0], runs[i], 7.0, T);
    r.ratio = r.data_diff_h7 > 0.0 ? r.solution_diff_h7 / r.data_diff_h7 : (r.solution_diff_h7 > 0.0 ? INFINITY : 0.0);
    r.bitwise_identical = bitwise_equal(runs[0], runs[i]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<RegularizationDifference> regularization_difference(const NonlinearitySpec& spec, const StateFunction& u0,
                                                                const std::vector<double>& epsilons,
                                                                const SolverConfig& solver, unsigned threads) {
  if (epsilons.size() < 2) throw ArgumentError("need at least two regularization parameters");
  std::vector<Trajectory> runs(epsilons.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < epsilons.size(); ++i)
    tasks.emplace_back([&, i] {
      SolverConfig sc = solver;
      sc.epsilon = epsilons[i];
      runs[i] = integrate(spec, u0, sc);
    });
  run_parallel(tasks, worker_count(threads));
  std::vector<RegularizationDifference> out;
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    RegularizationDifference d;
    d.eps_a = epsilons[i];
    d.eps_b = epsilons[i + 1];
    d.h3_diff = sup_difference(runs[i], runs[i + 1], 3.0, std::min(runs[i].final_time(), runs[i + 1].final_time()));
    d.constant = d.h3_diff / (d.eps_a + d.eps_b);
    out.push_back(d);
  }
  return out;
}

double difference_window(const Trajectory& a, const Trajectory& b, double c) {
  const double bound = c * (a.epsilon + b.epsilon);
  double sup = 0.0, window = std::numeric_limits<double>::quiet_NaN();
  for (const auto& ua : a.snapshots) {
    const auto* ub = find_snapshot(b, ua.time());
    if (!ub) continue;
    sup = std::max(sup, sobolev_norm(ua - *ub, 3.0));
    if (sup > bound) break;
    window = ua.time();
  }
  return window;
}

}  // namespace dforge
