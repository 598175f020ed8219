#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dforge/coefficients.hpp"
#include "dforge/errors.hpp"
#include "dforge/gauge.hpp"
#include "dforge/ladder.hpp"
#include "dforge/mollify.hpp"
#include "dforge/nonlinearity.hpp"
#include "dforge/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dforge;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kContract = 2;

struct Common {
  std::string preset = "kdv";
  std::string config;
  int N = 0;
  double L = 0.0;
  std::string out = "dforge_out";
  unsigned seed = 20240517u;
  unsigned threads = 0;
};

struct RunOptions {
  double delta = 0.0;
  bool couple_eps = false;
  double eps = 0.0;
  double t_end = 1.0;
  double dt = 1e-3;
  bool fixed_step = false;
  double snapshot_interval = 0.0;
  int monitor_order = 7;
};

struct Context {
  Preset preset;
  SpectralGrid grid;
  StateFunction u0;
};

Context load(const Common& c) {
  Preset p = c.config.empty() ? PresetCatalogue::builtin().get(c.preset) : load_preset_config(c.config);
  const double L = c.L > 0.0 ? c.L : p.length;
  const int N = c.N > 0 ? c.N : p.n_modes;
  SpectralGrid grid(L, N);
  auto u0 = p.initial_data(grid);
  return {std::move(p), grid, std::move(u0)};
}

json common_manifest(const std::string& command, const Common& c, const Context& ctx) {
  json m;
  m["command"] = command;
  m["preset"] = ctx.preset.spec.name();
  m["config"] = c.config.empty() ? json(nullptr) : json(fs::absolute(c.config).string());
  m["L"] = ctx.grid.length();
  m["N"] = ctx.grid.size();
  m["seed"] = c.seed;
  m["threads"] = worker_count(c.threads);
  m["version"] = "0.1.0";
  return m;
}

json run_manifest(const RunOptions& r, double eps) {
  return {{"delta", r.delta > 0.0 ? json(r.delta) : json(nullptr)},
          {"couple_eps", r.couple_eps},
          {"epsilon", eps},
          {"t_end", r.t_end},
          {"dt", r.dt},
          {"fixed_step", r.fixed_step},
          {"snapshot_interval", r.snapshot_interval},
          {"monitor_order", r.monitor_order}};
}

void write_manifest(const fs::path& dir, const json& m) { std::ofstream(dir / "manifest.json") << m.dump(2) << '\n'; }

fs::path prepare(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigurationError("cannot create output directory " + out);
  return dir;
}

double resolve_epsilon(const RunOptions& r) {
  if (r.couple_eps) {
    if (!(r.delta > 0.0)) throw ConfigurationError("--couple-eps requires --delta");
    return std::pow(r.delta, 5);
  }
  return r.eps;
}

SolverConfig solver_config(const RunOptions& r, double eps) {
  SolverConfig s;
  s.epsilon = eps;
  s.t_end = r.t_end;
  s.dt_init = r.dt;
  s.dt_min = std::min(1e-12, r.dt);
  s.adaptive = !r.fixed_step;
  s.snapshot_interval = r.snapshot_interval;
  s.monitor_order = r.monitor_order;
  return s;
}

void add_run_options(CLI::App* app, RunOptions& r) {
  app->add_option("--delta", r.delta, "Mollification scale; data become (u0)_delta");
  app->add_flag("--couple-eps", r.couple_eps, "Set eps = delta^5");
  app->add_option("--eps", r.eps, "Hyperdiffusion coefficient")->check(CLI::NonNegativeNumber);
  app->add_option("--t-end", r.t_end, "Final time")->check(CLI::PositiveNumber);
  app->add_option("--dt", r.dt, "Initial (or fixed) time step")->check(CLI::PositiveNumber);
  app->add_flag("--fixed-step", r.fixed_step, "Disable adaptive step control");
  app->add_option("--snapshot-interval", r.snapshot_interval, "Snapshot spacing; 0 keeps every step");
  app->add_option("--monitor-order", r.monitor_order, "Derivative order of the gauge columns; 0 disables");
}

void write_long_csv(const fs::path& path, const Trajectory& tr) {
  std::ofstream os(path);
  os << "t,x,u\n";
  os.precision(17);
  auto x = tr.grid().nodes();
  for (const auto& s : tr.snapshots)
    for (int i = 0; i < s.size(); ++i) os << s.time() << ',' << x[static_cast<std::size_t>(i)] << ',' << s[i] << '\n';
}

int cmd_solve(const Common& c, const RunOptions& r) {
  auto ctx = load(c);
  const double eps = resolve_epsilon(r);
  auto data = r.delta > 0.0 ? mollify(ctx.u0, r.delta).result : ctx.u0;
  auto tr = integrate(ctx.preset.spec, data, solver_config(r, eps));
  if (r.delta > 0.0) tr.delta = r.delta;
  const auto dir = prepare(c.out);
  write_trajectory(tr, dir.string());
  write_long_csv(dir / "trajectory.csv", tr);
  auto m = common_manifest("solve", c, ctx);
  m["run"] = run_manifest(r, eps);
  m["termination"] = to_string(tr.termination);
  write_manifest(dir, m);
  std::cout << "termination " << to_string(tr.termination) << " at t = " << tr.final_time() << " after "
            << tr.accepted_steps << " steps\n";
  return kOk;
}

int cmd_mollify(const Common& c, std::vector<double> deltas) {
  auto ctx = load(c);
  const auto rep = mollifier_report(ctx.u0, deltas);
  const auto dir = prepare(c.out);
  std::ofstream(dir / "mollifier.csv") << [&] {
    std::ostringstream os;
    rep.write_csv(os);
    return os.str();
  }();
  bool ok = true;
  for (const auto& row : rep.rows)
    for (int j = 1; j <= 4; ++j)
      if (row.h[j] > std::pow(3.0, j) * std::pow(row.delta, -j) * rep.h7_original) ok = false;
  auto m = common_manifest("mollify-report", c, ctx);
  m["deltas"] = deltas;
  m["bounds_hold"] = ok;
  write_manifest(dir, m);
  std::cout << "fitted L2 rate " << rep.fitted_l2_rate << ", derivative bounds " << (ok ? "hold" : "VIOLATED") << '\n';
  return ok ? kOk : kContract;
}

int cmd_gauge(const Common& c, const RunOptions& r, int n) {
  auto ctx = load(c);
  const double eps = resolve_epsilon(r);
  auto data = r.delta > 0.0 ? mollify(ctx.u0, r.delta).result : ctx.u0;
  auto cfg = solver_config(r, eps);
  cfg.monitor_order = 0;
  if (cfg.snapshot_interval <= 0.0) cfg.snapshot_interval = r.t_end / 100.0;
  const auto tr = integrate(ctx.preset.spec, data, cfg);
  const auto dir = prepare(c.out);
  auto m = common_manifest("gauge-audit", c, ctx);
  m["run"] = run_manifest(r, eps);
  m["run"]["snapshot_interval"] = cfg.snapshot_interval;
  m["n"] = n;
  m["termination"] = to_string(tr.termination);

  const auto coeffs = linearized_coefficients(ctx.preset.spec, data, n, eps);
  bool ok = true;
  try {
    const auto g = build_gauge(coeffs.a3, coeffs.a2);
    std::ofstream os(dir / "gauge.csv");
    os << "x,phi,a3,a2\n";
    os.precision(17);
    for (int i = 0; i < g.phi.size(); ++i)
      os << ctx.grid.nodes()[static_cast<std::size_t>(i)] << ',' << g.phi[i] << ',' << g.a3[i] << ',' << g.a2[i] << '\n';
    m["gauge_residual"] = g.ode_residual;
    m["gauge_ramp"] = g.ramp;
    if (!(g.ode_residual <= 1e-8)) ok = false;
  } catch (const DegeneracyError& e) {
    m["gauge_error"] = e.what();
  }
  const auto cn = coefficient_norms(coeffs);
  m["k_G"] = std::isfinite(cn.k_G) ? json(cn.k_G) : json("inf");
  m["M_tilde"] = std::isfinite(cn.M_tilde) ? json(cn.M_tilde) : json("inf");

  if (tr.snapshots.size() >= 3) {
    const auto gauged = gauged_energy_rate(ctx.preset.spec, tr, n);
    const auto plain = gauged_energy_rate(ctx.preset.spec, tr, n, {false});
    std::ofstream g1(dir / "energy_gauged.csv");
    gauged.write_csv(g1);
    std::ofstream g2(dir / "energy_ungauged.csv");
    plain.write_csv(g2);
    m["sup_rate_gauged"] = gauged.sup_rate;
    m["sup_rate_ungauged"] = plain.sup_rate;
    m["gronwall_holds"] = gauged.gronwall_holds;
    m["envelope_holds"] = gauged.envelope_holds;
    m["flagged_rows"] = gauged.flagged_rows;
    if (gauged.flagged_rows == 0 && !gauged.gronwall_holds) ok = false;
    std::cout << "sup r gauged " << gauged.sup_rate << ", ungauged " << plain.sup_rate << ", flagged rows "
              << gauged.flagged_rows << '\n';
  }
  std::cout << "k_G " << cn.k_G << ", M~ " << cn.M_tilde << '\n';
  write_manifest(dir, m);
  return ok ? kOk : kContract;
}

int cmd_coeff(const Common& c, int n, int samples) {
  auto ctx = load(c);
  const auto dir = prepare(c.out);
  auto m = common_manifest("coeff-audit", c, ctx);
  m["n"] = n;
  m["samples"] = samples;
  bool ok = true;
  const auto& terms = faa_di_bruno_terms(n);
  {
    std::ofstream os(dir / "terms.json");
    write_terms_json(os, terms);
  }
  m["term_count"] = terms.size();
  if (n == 3) {
    auto a = tabulated_third_derivative_terms();
    auto b = expansion_terms(3);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const bool match = a == b;
    m["table_terms"] = a.size();
    m["table_match"] = match;
    std::cout << "table " << a.size() << " terms, generator " << b.size() << " terms, "
              << (match ? "bijective match" : "MISMATCH") << '\n';
    ok = ok && match;
  }
  const double tol = n <= 7 ? 1e-6 : 1e-4;
  const auto states = ctx.preset.sample_states(ctx.grid, samples, c.seed);
  std::vector<double> errors(states.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < states.size(); ++i)
    tasks.emplace_back([&, i] {
      const auto co = linearized_coefficients(ctx.preset.spec, states[i], n);
      errors[i] = reconstruction_error(ctx.preset.spec, states[i], co);
    });
  run_parallel(tasks, worker_count(c.threads));
  std::ofstream os(dir / "reconstruction.csv");
  os << "sample,relative_error\n";
  os.precision(17);
  double worst = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    os << i << ',' << errors[i] << '\n';
    worst = std::max(worst, errors[i]);
  }
  m["reconstruction_worst"] = worst;
  m["reconstruction_tolerance"] = tol;
  if (!(worst <= tol)) ok = false;
  std::cout << "reconstruction worst relative error " << worst << " (tolerance " << tol << ")\n";
  write_manifest(dir, m);
  return ok ? kOk : kContract;
}

int cmd_ladder(const Common& c, const RunOptions& r, const std::vector<double>& deltas) {
  auto ctx = load(c);
  LadderConfig cfg{.deltas = deltas,
                   .u0 = ctx.u0,
                   .solver = solver_config(r, 0.0),
                   .t_target = std::nullopt,
                   .mollify_data = true,
                   .threads = c.threads};
  const auto rep = run_ladder(ctx.preset.spec, cfg);
  const auto dir = prepare(c.out);
  std::ofstream(dir / "ladder.json") << [&] {
    std::ostringstream os;
    rep.write_json(os);
    return os.str();
  }();
  std::ofstream rungs(dir / "rungs.csv");
  rep.write_rungs_csv(rungs);
  std::ofstream pairs(dir / "pairwise.csv");
  rep.write_pairwise_csv(pairs);
  auto m = common_manifest("ladder", c, ctx);
  m["run"] = run_manifest(r, 0.0);
  m["run"]["coupling"] = "eps = delta^5";
  m["deltas"] = deltas;
  m["contracts_hold"] = rep.contracts_hold();
  write_manifest(dir, m);
  std::cout << "common time " << rep.common_time << "; cauchy " << rep.cauchy_decreasing << ", H11 product "
            << rep.h11_bounded << ", residual " << rep.residual_shrinking << '\n';
  return rep.contracts_hold() ? kOk : kContract;
}

StateFunction random_perturbation(const SpectralGrid& grid, double amplitude, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::vector<Complex> spec(static_cast<std::size_t>(grid.spectrum_size()));
  for (std::size_t k = 1; k <= 4 && k < spec.size(); ++k) spec[k] = Complex(gauss(rng), gauss(rng));
  auto p = StateFunction::from_spectrum(grid, std::move(spec));
  return (amplitude / p.max_abs()) * p;
}

int cmd_depend(const Common& c, const RunOptions& r, const std::vector<double>& amplitudes) {
  auto ctx = load(c);
  if (!(r.delta > 0.0)) throw ConfigurationError("depend-probe requires --delta");
  std::mt19937_64 rng(c.seed);
  const auto shape = random_perturbation(ctx.grid, 1.0, rng);
  std::vector<StateFunction> perts{StateFunction::constant(ctx.grid, 0.0)};
  for (double a : amplitudes) perts.push_back(a * shape);
  const auto rows = continuous_dependence_probe(ctx.preset.spec, ctx.u0, perts, r.delta,
                                                solver_config(r, std::pow(r.delta, 5)), c.threads);
  const auto dir = prepare(c.out);
  std::ofstream os(dir / "dependence.csv");
  os << "amplitude,data_diff_h7,solution_diff_h7,ratio,bitwise_identical\n";
  os.precision(17);
  bool ok = rows.front().bitwise_identical;
  double lo = INFINITY, hi = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double a = i == 0 ? 0.0 : amplitudes[i - 1];
    os << a << ',' << rows[i].data_diff_h7 << ',' << rows[i].solution_diff_h7 << ',' << rows[i].ratio << ','
       << rows[i].bitwise_identical << '\n';
    if (i > 0) {
      lo = std::min(lo, rows[i].ratio);
      hi = std::max(hi, rows[i].ratio);
    }
  }
  if (rows.size() > 1 && !(hi <= 3.0 * lo)) ok = false;
  auto m = common_manifest("depend-probe", c, ctx);
  m["run"] = run_manifest(r, std::pow(r.delta, 5));
  m["amplitudes"] = amplitudes;
  m["contracts_hold"] = ok;
  write_manifest(dir, m);
  std::cout << "zero perturbation " << (rows.front().bitwise_identical ? "bitwise identical" : "DIFFERS")
            << ", ratio spread " << (rows.size() > 1 ? hi / lo : 1.0) << '\n';
  return ok ? kOk : kContract;
}

void print_presets(std::ostream& os) {
  os << "available presets:";
  for (const auto& n : PresetCatalogue::builtin().names()) os << ' ' << n;
  os << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for fully nonlinear third-order dispersive equations"};
  app.require_subcommand(1);
  Common common;
  RunOptions run;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--preset", common.preset, "Built-in preset name");
    sub->add_option("--config", common.config, "Preset file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--N", common.N, "Grid points")->check(CLI::PositiveNumber);
    sub->add_option("--L", common.L, "Period")->check(CLI::PositiveNumber);
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--seed", common.seed, "Seed for randomized audits");
    sub->add_option("--threads", common.threads, "Worker pool size (0: logical cores)");
  };

  auto* solve = app.add_subcommand("solve", "Integrate one trajectory");
  add_common(solve);
  add_run_options(solve, run);

  std::vector<double> mollify_deltas{0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
  auto* moll = app.add_subcommand("mollify-report", "Sobolev norms of mollified data along a delta ladder");
  add_common(moll);
  moll->add_option("--deltas", mollify_deltas, "Decreasing delta ladder");

  int gauge_n = 7;
  auto* gauge = app.add_subcommand("gauge-audit", "Gauge construction and energy ledger along a run");
  add_common(gauge);
  add_run_options(gauge, run);
  gauge->add_option("--n", gauge_n, "Derivative order")->check(CLI::Range(3, 11));

  int coeff_n = 3, coeff_samples = 8;
  auto* coeff = app.add_subcommand("coeff-audit", "Expansion terms and reconstruction identity");
  add_common(coeff);
  coeff->add_option("--n", coeff_n, "Derivative order")->check(CLI::Range(1, 11));
  coeff->add_option("--samples", coeff_samples, "Random states")->check(CLI::PositiveNumber);

  std::vector<double> ladder_deltas{0.2, 0.1, 0.05};
  auto* ladder = app.add_subcommand("ladder", "Run the eps = delta^5 ladder");
  add_common(ladder);
  add_run_options(ladder, run);
  ladder->add_option("--deltas", ladder_deltas, "Decreasing delta ladder");

  std::vector<double> amplitudes{1e-2, 1e-3, 1e-4};
  auto* depend = app.add_subcommand("depend-probe", "Solution differences under data perturbations");
  add_common(depend);
  add_run_options(depend, run);
  depend->add_option("--amplitudes", amplitudes, "Perturbation amplitudes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (common.config.empty() && !PresetCatalogue::builtin().contains(common.preset)) {
      std::cerr << "unknown preset '" << common.preset << "'\n";
      print_presets(std::cerr);
      return kUsage;
    }
    if (*solve) return cmd_solve(common, run);
    if (*moll) return cmd_mollify(common, mollify_deltas);
    if (*gauge) return cmd_gauge(common, run, gauge_n);
    if (*coeff) return cmd_coeff(common, coeff_n, coeff_samples);
    if (*ladder) return cmd_ladder(common, run, ladder_deltas);
    if (*depend) return cmd_depend(common, run, amplitudes);
  } catch (const DegeneracyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kContract;
  } catch (const HarnessError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
