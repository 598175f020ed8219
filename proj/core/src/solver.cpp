#include "dforge/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "dforge/errors.hpp"
#include "dforge/gauge.hpp"

namespace dforge {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::reached_t_end: return "reached_t_end";
    case Termination::blowup_detected: return "blowup_detected";
    case Termination::dispersion_degenerate: return "dispersion_degenerate";
    case Termination::step_underflow: return "step_underflow";
  }
  return "unknown";
}

bool check_blowup(const StateFunction& u, double threshold) { return sobolev_norm(u, 4.0) > threshold; }

std::array<double, 4> frozen_linear_part(const NonlinearitySpec& spec, const StateFunction& u, StiffSplit split) {
  if (split == StiffSplit::exact_hyperdiffusion) return {0, 0, 0, 0};
  if (spec.linear_part()) return *spec.linear_part();
  if (!spec.depends_on(Slot::Z3)) return {0, 0, 0, 0};
  return {0, 0, 0, partial_field(spec, PartialKey({Slot::Z3}), u).mean()};
}

namespace {

double spectral_l2(const SpectralGrid& grid, const std::vector<Complex>& c) {
  const std::size_t half = c.size() - 1;
  double s = 0.0;
  for (std::size_t k = 0; k <= half; ++k) s += ((k == 0 || k == half) ? 1.0 : 2.0) * std::norm(c[k]);
  return std::sqrt(grid.length() * s);
}

class Stepper {
 public:
  Stepper(const NonlinearitySpec& spec, const SpectralGrid& grid, double epsilon, std::array<double, 4> c)
      : spec_(spec), grid_(grid), m_(static_cast<std::size_t>(grid.spectrum_size())), n_(static_cast<std::size_t>(grid.size())),
        symbol_(m_), linear_(m_), mask_(m_), e1_(m_), e2_(m_), deriv_(4, std::vector<Complex>(m_)),
        fields_(4, std::vector<double>(n_)), fvals_(n_), fhat_(m_) {
    auto xi = grid.wavenumbers();
    const std::size_t nyq = m_ - 1;
    const std::size_t cut = static_cast<std::size_t>(grid.dealias_cutoff());
    for (std::size_t k = 0; k < m_; ++k) {
      Complex p = 0.0, ik = 1.0;
      for (int j = 0; j < 4; ++j) {
        if (!(k == nyq && j % 2 == 1)) p += c[static_cast<std::size_t>(j)] * ik;
        ik *= Complex(0.0, xi[k]);
      }
      linear_[k] = p;
      const double x2 = xi[k] * xi[k];
      symbol_[k] = -epsilon * x2 * x2 + p;
      mask_[k] = k <= cut ? 1.0 : 0.0;
      Complex d = 1.0;
      for (int j = 0; j < 4; ++j) {
        deriv_[static_cast<std::size_t>(j)][k] = (k <= cut && !(k == nyq && j % 2 == 1)) ? d : Complex(0.0);
        d *= Complex(0.0, xi[k]);
      }
    }
  }

  std::size_t modes() const { return m_; }

  void nonlinear(const std::vector<Complex>& u, double t, std::vector<Complex>& out) {
    std::vector<Complex> buf(m_);
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t k = 0; k < m_; ++k) buf[k] = deriv_[j][k] * u[k];
      grid_.inverse(buf, fields_[j]);
    }
    auto x = grid_.nodes();
    for (std::size_t i = 0; i < n_; ++i) {
      const Point p{fields_[3][i], fields_[2][i], fields_[1][i], fields_[0][i], x[i], t};
      const double v = spec_.value(p);
      if (!std::isfinite(v)) throw EvaluationError("non-finite value of f in '" + spec_.name() + "'", i);
      fvals_[i] = v;
    }
    grid_.forward(fvals_, fhat_);
    out.resize(m_);
    for (std::size_t k = 0; k < m_; ++k) out[k] = mask_[k] * (fhat_[k] - linear_[k] * u[k]);
  }

  /// One Lawson RK4 step from (u, t) with FSAL stage n1 = N(u, t). Returns the error estimate.
  double attempt(const std::vector<Complex>& u, const std::vector<Complex>& n1, double t, double h,
                 std::vector<Complex>& next, std::vector<Complex>& n5) {
    set_step(h);
    std::vector<Complex> s(m_), n2, n3, n4;
    for (std::size_t k = 0; k < m_; ++k) s[k] = e2_[k] * (u[k] + 0.5 * h * n1[k]);
    nonlinear(s, t + 0.5 * h, n2);
    for (std::size_t k = 0; k < m_; ++k) s[k] = e2_[k] * u[k] + 0.5 * h * n2[k];
    nonlinear(s, t + 0.5 * h, n3);
    for (std::size_t k = 0; k < m_; ++k) s[k] = e1_[k] * u[k] + h * e2_[k] * n3[k];
    nonlinear(s, t + h, n4);
    next.resize(m_);
    for (std::size_t k = 0; k < m_; ++k)
      next[k] = e1_[k] * u[k] + (h / 6.0) * (e1_[k] * n1[k] + 2.0 * e2_[k] * (n2[k] + n3[k]) + n4[k]);
    nonlinear(next, t + h, n5);
    for (std::size_t k = 0; k < m_; ++k) s[k] = (h / 6.0) * (n4[k] - n5[k]);
    return spectral_l2(grid_, s);
  }

 private:
  void set_step(double h) {
    if (h == h_) return;
    h_ = h;
    for (std::size_t k = 0; k < m_; ++k) {
      e1_[k] = std::exp(h * symbol_[k]);
      e2_[k] = std::exp(0.5 * h * symbol_[k]);
    }
  }

  const NonlinearitySpec& spec_;
  SpectralGrid grid_;
  std::size_t m_, n_;
  std::vector<Complex> symbol_, linear_;
  std::vector<double> mask_;
  std::vector<Complex> e1_, e2_;
  std::vector<std::vector<Complex>> deriv_;
  std::vector<std::vector<double>> fields_;
  std::vector<double> fvals_;
  std::vector<Complex> fhat_;
  double h_ = -1.0;
};

struct Monitor {
  const NonlinearitySpec& spec;
  double epsilon;
  int order;
  double sup_h4_lambda = 0.0, sup_h7 = 0.0, sup_h8 = 0.0;
  double prev_v2 = std::numeric_limits<double>::quiet_NaN();

  DiagnosticsRow record(const StateFunction& u, double h) {
    DiagnosticsRow r;
    r.t = u.time();
    r.l2 = l2_norm(u);
    r.h4 = sobolev_norm(u, 4.0);
    r.h7 = sobolev_norm(u, 7.0);
    r.h8 = sobolev_norm(u, 8.0);
    r.h11 = sobolev_norm(u, 11.0);
    r.lambda = dispersion_lambda(spec, u);
    sup_h4_lambda = std::max({sup_h4_lambda, r.h4, r.lambda});
    sup_h7 = std::max(sup_h7, r.h7);
    sup_h8 = std::max(sup_h8, r.h8);
    r.k_of_t = sup_h4_lambda;
    r.m_eps = sup_h7 + epsilon * sup_h8;
    if (order > 0 && std::isfinite(r.lambda)) {
      try {
        const auto a3 = partial_field(spec, PartialKey({Slot::Z3}), u);
        const auto a2 = partial_field(spec, PartialKey({Slot::Z2}), u) + static_cast<double>(order) * derivative(a3, 1);
        const auto g = build_gauge(a3, a2);
        r.gauge_residual = g.ode_residual;
        const auto w = derivative(u, order);
        std::vector<double> v(w.values().begin(), w.values().end());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] /= g.phi.values()[i];
        const double v2 = std::pow(l2_norm(StateFunction(u.grid(), std::move(v))), 2);
        if (h > 0.0 && std::isfinite(prev_v2)) r.energy_rate = (v2 - prev_v2) / h;
        prev_v2 = v2;
      } catch (const DegeneracyError&) {
        prev_v2 = std::numeric_limits<double>::quiet_NaN();
      }
    }
    return r;
  }
};

}  // namespace

StepResult step(const NonlinearitySpec& spec, const StateFunction& u, double dt, double epsilon, StiffSplit split) {
  if (!(dt > 0.0)) throw ArgumentError("time step must be positive");
  if (epsilon < 0.0) throw ArgumentError("regularization parameter must be nonnegative");
  Stepper stepper(spec, u.grid(), epsilon, frozen_linear_part(spec, u, split));
  std::vector<Complex> u0(u.spectrum().begin(), u.spectrum().end()), n1, next, n5;
  stepper.nonlinear(u0, u.time(), n1);
  const double err = stepper.attempt(u0, n1, u.time(), dt, next, n5);
  return {StateFunction::from_spectrum(u.grid(), std::move(next), u.time() + dt), err};
}

Trajectory integrate(const NonlinearitySpec& spec, const StateFunction& u0, const SolverConfig& cfg) {
  if (cfg.epsilon < 0.0) throw ArgumentError("regularization parameter must be nonnegative");
  if (!(cfg.dt_init > 0.0) || !(cfg.dt_min > 0.0) || cfg.dt_min > cfg.dt_init)
    throw ArgumentError("time steps must satisfy 0 < dt_min <= dt_init");
  if (!(cfg.t_end > u0.time())) throw ArgumentError("t_end must exceed the initial time");
  if (!(cfg.safety > 0.0 && cfg.safety <= 1.0)) throw ArgumentError("safety factor must lie in (0, 1]");

  Trajectory traj;
  traj.preset = spec.name();
  traj.epsilon = cfg.epsilon;
  const double lambda0 = dispersion_lambda(spec, u0);
  const bool nontrivial = spec.depends_on(Slot::Z0) || spec.depends_on(Slot::Z1) ||
                          spec.depends_on(Slot::Z2) || spec.depends_on(Slot::Z3);
  if (!std::isfinite(lambda0)) {
    if (cfg.epsilon == 0.0 && nontrivial)
      throw DegeneracyError("initial state has vanishing dispersion coefficient and epsilon = 0");
    traj.degenerate_start = true;
  }
  const double h4_0 = sobolev_norm(u0, 4.0);
  const double threshold = cfg.blowup_threshold_H4.value_or(
      h4_0 > 0.0 ? 1e3 * h4_0 : std::numeric_limits<double>::infinity());

  const auto& grid = u0.grid();
  Stepper stepper(spec, grid, cfg.epsilon, frozen_linear_part(spec, u0, cfg.stiff_split));
  Monitor monitor{spec, cfg.epsilon, cfg.monitor_order};

  std::vector<Complex> u(u0.spectrum().begin(), u0.spectrum().end()), n1, next, n5;
  double t = u0.time();
  stepper.nonlinear(u, t, n1);
  traj.snapshots.push_back(u0);
  traj.diagnostics.rows.push_back(monitor.record(u0, 0.0));

  const double interval = cfg.snapshot_interval;
  std::size_t snap_index = 1;
  auto next_snapshot = [&] { return interval > 0.0 ? u0.time() + static_cast<double>(snap_index) * interval : cfg.t_end; };

  double dt = std::min(cfg.dt_init, cfg.dt_max);
  double err_prev = 1.0;
  const double scale_floor = spectral_l2(grid, u);
  constexpr double kAlpha = 0.7 / 4.0, kBeta = 0.4 / 4.0;

  traj.termination = Termination::reached_t_end;
  while (t < cfg.t_end) {
    if (traj.accepted_steps + traj.rejected_steps >= cfg.max_steps) {
      traj.termination = Termination::step_underflow;
      break;
    }
    const double target = std::min(cfg.t_end, next_snapshot());
    double h = std::min(dt, target - t);
    const bool clipped = h < dt;
    // Avoid a sliver step right before the target.
    if (target - t - h < 1e-9 * h) h = target - t;

    double err_ratio;
    try {
      const double err = stepper.attempt(u, n1, t, h, next, n5);
      const double scale = cfg.atol + cfg.rtol * std::max(spectral_l2(grid, u), spectral_l2(grid, next));
      err_ratio = err / std::max(scale, 1e-300 * scale_floor);
      if (!std::isfinite(err_ratio)) throw EvaluationError("non-finite error estimate", 0);
    } catch (const EvaluationError&) {
      if (!cfg.adaptive) {
        traj.termination = Termination::blowup_detected;
        break;
      }
      err_ratio = std::numeric_limits<double>::infinity();
    }

    if (cfg.adaptive && !(err_ratio <= 1.0)) {
      ++traj.rejected_steps;
      const double factor = std::isfinite(err_ratio) ? std::max(0.2, cfg.safety * std::pow(err_ratio, -0.25)) : 0.25;
      dt = h * factor;
      if (dt < cfg.dt_min) {
        traj.termination = Termination::step_underflow;
        break;
      }
      continue;
    }

    ++traj.accepted_steps;
    t = (h == target - t) ? target : t + h;
    if (t == next_snapshot() && interval > 0.0) ++snap_index;
    u.swap(next);
    n1.swap(n5);

    if (cfg.adaptive) {
      const double e = std::max(err_ratio, 1e-10);
      double factor = cfg.safety * std::pow(e, -kAlpha) * std::pow(err_prev, kBeta);
      factor = std::clamp(factor, 0.2, 5.0);
      const double proposal = h * factor;
      dt = clipped ? std::max(proposal, dt) : proposal;
      dt = std::min(dt, cfg.dt_max);
      err_prev = e;
    }

    auto state = StateFunction::from_spectrum(grid, u, t);
    traj.diagnostics.rows.push_back(monitor.record(state, h));
    const auto& row = traj.diagnostics.rows.back();
    const bool at_snapshot = interval <= 0.0 || std::abs(t - (u0.time() + static_cast<double>(snap_index - 1) * interval)) == 0.0 ||
                             t == cfg.t_end;
    const bool blown = row.h4 > threshold || !std::isfinite(row.h4);
    const bool degenerate = cfg.epsilon == 0.0 && nontrivial && !std::isfinite(row.lambda);
    if (at_snapshot || blown || degenerate) traj.snapshots.push_back(state);
    if (blown) {
      traj.termination = Termination::blowup_detected;
      break;
    }
    if (degenerate) {
      traj.termination = Termination::dispersion_degenerate;
      break;
    }
  }
  if (traj.snapshots.back().time() != t) traj.snapshots.push_back(StateFunction::from_spectrum(grid, u, t));
  return traj;
}

void DiagnosticsRecord::write_csv(std::ostream& os) const {
  os << "t,l2,h4,h7,h8,h11,lambda,k_of_t,m_eps,gauge_residual,energy_rate\n";
  os.precision(17);
  for (const auto& r : rows)
    os << r.t << ',' << r.l2 << ',' << r.h4 << ',' << r.h7 << ',' << r.h8 << ',' << r.h11 << ',' << r.lambda << ','
       << r.k_of_t << ',' << r.m_eps << ',' << r.gauge_residual << ',' << r.energy_rate << '\n';
}

}  // namespace dforge
