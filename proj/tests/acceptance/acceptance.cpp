// Acceptance checks. Usage: dforge_acceptance [criterion ...]; no argument runs all seven.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dforge/coefficients.hpp"
#include "dforge/gauge.hpp"
#include "dforge/ladder.hpp"
#include "dforge/mollify.hpp"
#include "dforge/solver.hpp"

using namespace dforge;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const Preset& preset(const char* n) { return PresetCatalogue::builtin().get(n); }

StateFunction centred_gaussian(const SpectralGrid& g, double amp, double width2) {
  const double L = g.length();
  return StateFunction::sample(g, [&](double x) { return amp * std::exp(-(x - L / 2) * (x - L / 2) / width2); });
}

SolverConfig fixed_step(double dt, double t_end, double interval) {
  SolverConfig c;
  c.adaptive = false;
  c.dt_init = dt;
  c.t_end = t_end;
  c.snapshot_interval = interval;
  c.monitor_order = 0;
  return c;
}

// 1. Mollifier bounds and the o(δ⁷) approximation rate.
Outcome criterion1() {
  Outcome o;
  const SpectralGrid g(64 * kPi, 1024);
  const auto u0 = centred_gaussian(g, 1.0, 1.0);
  std::vector<double> deltas;
  for (int p = 3; p <= 8; ++p) deltas.push_back(std::ldexp(1.0, -p));
  const auto rep = mollifier_report(u0, deltas);
  bool bounds = true;
  double worst = 0.0;
  for (const auto& r : rep.rows)
    for (int j = 1; j <= 4; ++j) {
      const double cap = std::pow(3.0, j) * std::pow(r.delta, -j) * rep.h7_original;
      worst = std::max(worst, r.h[j] / cap);
      if (!(r.h[j] <= cap)) bounds = false;
    }
  o.require(bounds, fmt("H^{7+j} <= 3^j delta^-j H^7 (worst ratio %.3g)", worst));
  std::vector<double> scaled;
  for (const auto& r : rep.rows) scaled.push_back(r.l2_diff / std::pow(r.delta, 7));
  const std::size_t n = scaled.size();
  const bool strict = scaled[n - 2] < scaled[n - 3] && scaled[n - 1] < scaled[n - 2];
  o.require(strict, fmt("L2 diff / delta^7 strictly decreasing on last 3 rungs (%.3g, %.3g, %.3g)", scaled[n - 3],
                        scaled[n - 2], scaled[n - 1]));
  const bool weak = scaled[n - 2] <= scaled[n - 3] && scaled[n - 1] <= scaled[n - 2];
  std::printf("  info: non-strict monotonicity %s; grid max wavenumber %.3g\n", weak ? "holds" : "fails",
              g.max_wavenumber());
  return o;
}

// 2. Gauge ODE residual on random pairs and closed forms.
Outcome criterion2() {
  Outcome o;
  const SpectralGrid g(2 * kPi, 128);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  auto random_field = [&](double mean, double scale) {
    std::vector<Complex> s(static_cast<std::size_t>(g.spectrum_size()));
    s[0] = mean;
    for (int k = 1; k <= 4; ++k) s[static_cast<std::size_t>(k)] = scale * Complex(n01(rng), n01(rng)) / double(k * k);
    return StateFunction::from_spectrum(g, std::move(s));
  };
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto a3 = random_field(i % 2 ? 2.0 : -2.0, 0.1);
    const auto a2 = random_field(0.0, 1.0);
    worst = std::max(worst, build_gauge(a3, a2).ode_residual);
  }
  o.require(worst <= 1e-8, fmt("100 random pairs, max residual %.3g <= 1e-8", worst));
  const auto one = StateFunction::constant(g, 1.0);
  const auto e = build_gauge(one, StateFunction::sample(g, [](double x) { return 3 * std::cos(x); }));
  const double err = (e.phi - StateFunction::sample(g, [](double x) { return std::exp(-std::sin(x)); })).max_abs();
  o.require(err <= 1e-10, fmt("phi = exp(-sin x) to %.3g <= 1e-10", err));
  const auto s = build_gauge(StateFunction::sample(g, [](double x) { return 2 + std::sin(x); }),
                             StateFunction::constant(g, 0.0));
  const double err2 =
      (s.phi - StateFunction::sample(g, [](double x) { return std::sqrt((2 + std::sin(x)) / 2); })).max_abs();
  o.require(err2 <= 1e-10, fmt("phi = sqrt((2 + sin x)/2) to %.3g <= 1e-10", err2));
  return o;
}

// 3. Term table and reconstruction identity.
Outcome criterion3() {
  Outcome o;
  auto gen = expansion_terms(3);
  auto app = tabulated_third_derivative_terms();
  std::sort(gen.begin(), gen.end());
  std::sort(app.begin(), app.end());
  o.require(faa_di_bruno_terms(3).size() == 59, "59 terms at n = 3");
  o.require(gen == app, "generated terms match the hand-written expansion");
  for (const char* name : {"kdv", "k22"}) {
    const auto& p = preset(name);
    const auto u = p.initial_data(p.default_grid());
    for (int n : {3, 7, 11}) {
      const double tol = n == 11 ? 1e-4 : 1e-6;
      const double err = reconstruction_error(p.spec, u, linearized_coefficients(p.spec, u, n));
      o.require(err <= tol, std::string(name) + fmt(" n=%.0f relative error %.3g <= %.0e", n, err, tol));
    }
  }
  return o;
}

// 4. Solver oracles.
Outcome criterion4() {
  Outcome o;
  const auto& kdv = preset("kdv").spec;
  {
    const SpectralGrid g(32 * kPi, 512);
    auto sol = [&](double t) {
      return StateFunction::sample(g, [&](double x) {
        const double s = 1.0 / std::cosh(0.5 * (x - 16 * kPi - t));
        return 0.5 * s * s;
      }, t);
    };
    SolverConfig c;
    c.t_end = 1.0;
    c.snapshot_interval = 1.0;
    c.monitor_order = 0;
    const auto tr = integrate(kdv, sol(0.0), c);
    const double err = l2_norm(tr.snapshots.back() - sol(1.0));
    o.require(tr.final_time() == 1.0 && err < 1e-6, fmt("soliton L2 shape error %.3g < 1e-6", err));
  }
  {
    const SpectralGrid g(16 * kPi, 256);
    const auto u0 = centred_gaussian(g, 0.5, 4.0);
    auto end = [&](double dt) { return integrate(kdv, u0, fixed_step(dt, 0.1, 0.1)).snapshots.back(); };
    const auto ref = end(0.01 / 16);
    const double ratio = l2_norm(end(0.01) - ref) / l2_norm(end(0.005) - ref);
    o.require(ratio >= 12 && ratio <= 20, fmt("dt-halving ratio %.3g in [12, 20]", ratio));
  }
  {
    const SpectralGrid g(2 * kPi, 64);
    const NonlinearitySpec zero("zero", "0");
    const auto u0 = StateFunction::sample(g, [](double x) { return std::exp(std::sin(x)); });
    auto c = fixed_step(0.01, 0.1, 0.1);
    c.epsilon = 1.0;
    const auto tr = integrate(zero, u0, c);
    std::vector<Complex> s(u0.spectrum().begin(), u0.spectrum().end());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] *= std::exp(-std::pow(g.wavenumbers()[k], 4) * 0.1);
    const double err = (tr.snapshots.back() - StateFunction::from_spectrum(g, s)).max_abs();
    o.require(err <= 1e-12, fmt("hyperdiffusion error %.3g <= 1e-12", err));
  }
  {
    const auto& back = preset("linear_backwards").spec;
    double worst = 0.0;
    for (int k : {1, 2, 4}) {
      // a small grid keeps roundoff growth in the top mode below the tolerance over the window
      const SpectralGrid g(2 * kPi, std::max(8, 4 * k));
      const auto u0 = StateFunction::sample(g, [k](double x) { return 1e-3 * std::cos(k * x); });
      const double t_end = 2.0 / (k * k);
      const auto tr = integrate(back, u0, fixed_step(t_end / 2000, t_end, t_end / 10));
      for (const auto& s : tr.snapshots)
        worst = std::max(worst, std::abs(l2_norm(s) / (l2_norm(u0) * std::exp(k * k * s.time())) - 1));
    }
    o.require(worst <= 0.01, fmt("backward growth matches exp(xi^2 t), worst relative deviation %.3g <= 1%%", worst));
  }
  return o;
}

// 5. Gauged energy constant across refinement.
Outcome criterion5() {
  Outcome o;
  const auto& p = preset("linear_gauged");
  std::vector<double> gauged, plain;
  bool consistent = true;
  for (int N : {256, 512, 1024}) {
    const SpectralGrid g(8 * kPi, N);
    const auto u0 = StateFunction::sample(g, [&](double x) {
      return std::exp(-(x - 4 * kPi) * (x - 4 * kPi)) * std::cos(6 * x);
    });
    SolverConfig c;
    c.epsilon = 1e-4;
    c.t_end = 1.0;
    c.snapshot_interval = 0.01;
    c.monitor_order = 0;
    const auto tr = integrate(p.spec, u0, c);
    if (tr.termination != Termination::reached_t_end) consistent = false;
    const auto lg = gauged_energy_rate(p.spec, tr, 7);
    const auto lp = gauged_energy_rate(p.spec, tr, 7, {false});
    gauged.push_back(lg.sup_rate);
    plain.push_back(lp.sup_rate);
    consistent = consistent && lg.gronwall_holds && lg.envelope_holds && lp.gronwall_holds && lp.envelope_holds;
    std::printf("  N=%d gauged sup r %.6g, ungauged %.6g, flagged rows %zu\n", N, lg.sup_rate, lp.sup_rate,
                lg.flagged_rows);
  }
  const auto [lo, hi] = std::minmax_element(gauged.begin(), gauged.end());
  o.require(*lo > 0 && *hi / *lo <= 2.0, fmt("gauged constant spread %.4g <= 2", *hi / *lo));
  bool exceeds = true;
  for (std::size_t i = 0; i < gauged.size(); ++i) exceeds = exceeds && plain[i] > gauged[i];
  o.require(exceeds, "ungauged rate exceeds gauged rate at every N");
  o.require(consistent, "Gronwall bound and envelope hold on every ledger");
  return o;
}

// 6. The ε = δ⁵ ladder.
Outcome criterion6() {
  Outcome o;
  struct Case {
    const char* name;
    double base, amp;
  };
  for (const Case& cs : {Case{"kdv", 0.0, 0.5}, Case{"k22", 2.0, 0.1}}) {
    const auto& p = preset(cs.name);
    const SpectralGrid g(16 * kPi, 256);
    const auto u0 = StateFunction::constant(g, cs.base) + centred_gaussian(g, cs.amp, 4.0);
    LadderConfig cfg{{0.2, 0.1, 0.05}, u0, fixed_step(2.5e-4, 1.0, 0.0), std::nullopt, true, 0};
    const auto rep = run_ladder(p.spec, cfg);
    std::printf("  %s: T = %.3g, H3 diffs %.4g > %.4g, delta^4 H11 %.4g %.4g %.4g\n", cs.name, rep.common_time,
                rep.pairwise_h3[0][1], rep.pairwise_h3[1][2], rep.rungs[0].h11_delta4, rep.rungs[1].h11_delta4,
                rep.rungs[2].h11_delta4);
    std::printf("  %s: eps=0 residual %.4g %.4g %.4g, proportionality %.4g %.4g %.4g\n", cs.name,
                rep.rungs[0].residual_zero_sup, rep.rungs[1].residual_zero_sup, rep.rungs[2].residual_zero_sup,
                rep.residual_proportionality[0], rep.residual_proportionality[1], rep.residual_proportionality[2]);
    const std::string n = cs.name;
    o.require(rep.common_time > 0.0, n + fmt(" common window %.3g > 0", rep.common_time));
    o.require(rep.cauchy_decreasing, n + " H3 differences strictly decreasing");
    o.require(rep.h11_bounded, n + " delta^4 H11 non-growing");
    o.require(rep.residual_shrinking, n + " eps=0 residual shrinking in proportion to eps |d^4 u|");
  }
  const auto& kdv = preset("kdv").spec;
  const SpectralGrid g(16 * kPi, 256);
  const auto u0 = centred_gaussian(g, 0.5, 4.0);
  const auto rows = continuous_dependence_probe(kdv, u0, {0.0 * u0}, 0.05, fixed_step(2.5e-4, 0.25, 0.0));
  o.require(rows.size() == 1 && rows[0].bitwise_identical && rows[0].solution_diff_h7 == 0.0,
            "zero perturbation gives bitwise-identical runs");
  return o;
}

// 7. Negative controls.
Outcome criterion7() {
  Outcome o;
  const auto& pilod = preset("pilod_illposed");
  const auto adm = check_admissibility(pilod.spec, pilod.sample_states(pilod.default_grid(), 4, 3));
  o.require(!adm.a2.pass, "pilod_illposed fails the decomposition check (" + adm.a2.detail + ")");
  const auto& back = preset("linear_backwards");
  const auto ub = back.initial_data(back.default_grid());
  const auto norms = coefficient_norms(linearized_coefficients(back.spec, ub, 7));
  o.require(std::isinf(norms.k_G), "linear_backwards k_G is +inf");
  const SpectralGrid g(2 * kPi, 16);
  const auto u0 = StateFunction::sample(g, [](double x) { return std::cos(8 * x); });
  const double dt = 1e-4;
  const auto tr = integrate(back.spec, u0, fixed_step(dt, 1.0, 0.0));
  const double xi = g.max_wavenumber();
  const double predicted = std::log(1e3) / (xi * xi);
  o.require(tr.termination == Termination::blowup_detected &&
                std::abs(tr.final_time() - predicted) <= dt * (1 + 1e-9),
            fmt("blow-up at t = %.6g, predicted %.6g +- %.0e", tr.final_time(), predicted, dt));
  return o;
}

struct Criterion {
  Outcome (*run)();
  double budget;  // seconds
};

const Criterion kCriteria[] = {{criterion1, 5},  {criterion2, 5},   {criterion3, 30}, {criterion4, 60},
                               {criterion5, 120}, {criterion6, 600}, {criterion7, 30}};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= 7; ++i) which.push_back(i);
  bool all = true;
  for (int c : which) {
    if (c < 1 || c > 7) {
      std::fprintf(stderr, "unknown criterion %d\n", c);
      return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = kCriteria[c - 1].run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < kCriteria[c - 1].budget, fmt("runtime %.2f s < %.0f s", secs, kCriteria[c - 1].budget));
    std::printf("criterion %d: %s | %s\n", c, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
