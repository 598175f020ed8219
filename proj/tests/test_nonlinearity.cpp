#include <doctest.h>

#include <cmath>
#include <random>

#include "dforge/errors.hpp"
#include "dforge/nonlinearity.hpp"
#include "support.hpp"

using namespace dforge;
using namespace dforge::testing;

namespace {

const Preset& preset(const std::string& n) { return PresetCatalogue::builtin().get(n); }

StateFunction on_circle(const std::function<double(double)>& f, int n = 64) {
  return StateFunction::sample(SpectralGrid(2 * kPi, n), f);
}

}  // namespace

TEST_CASE("catalogue") {
  const auto& cat = PresetCatalogue::builtin();
  for (const char* n : {"kdv", "k22", "harry_dym", "pilod_illposed", "linear_backwards", "linear_gauged"})
    CHECK(cat.contains(n));
  try {
    cat.get("nosuch");
    FAIL("expected a configuration error");
  } catch (const ConfigurationError& e) {
    CHECK(std::string(e.what()).find("kdv") != std::string::npos);
  }
}

TEST_CASE("partial keys") {
  auto k = PartialKey::parse("f_xz0z1");
  CHECK(k.order() == 3);
  CHECK(k.count(Slot::X) == 1);
  CHECK(k.count(Slot::Z0) == 1);
  CHECK(PartialKey::parse(k.name()) == k);
  CHECK(PartialKey::parse("f_z1z0x") == k);
  CHECK(k.with(Slot::Z3).order() == 4);
  CHECK_THROWS_AS(PartialKey::parse("f_q"), ConfigurationError);
  CHECK_THROWS_AS(PartialKey::parse("f_"), ConfigurationError);
  CHECK(arg_index(Slot::Z3) == 0);
  CHECK(arg_index(Slot::Z0) == 3);
  CHECK(arg_index(Slot::X) == 4);
  CHECK(arg_index(Slot::T) == 5);
}

TEST_CASE("evaluate_rhs examples") {
  const auto& kdv = preset("kdv").spec;
  auto zero = on_circle([](double) { return 0.0; });
  CHECK(evaluate_rhs(kdv, zero).max_abs() == 0.0);

  auto s = on_circle([](double x) { return std::sin(x); });
  auto expect = on_circle([](double x) { return std::cos(x) - 3 * std::sin(2 * x); });
  CHECK(max_diff(evaluate_rhs(kdv, s), expect) < 1e-11);

  const auto& k22 = preset("k22").spec;
  auto u = on_circle([](double x) { return 2 + std::sin(x); });
  auto u2 = u * u;
  auto conservative = -1.0 * derivative(u2, 3) - derivative(u2, 1);
  CHECK(max_diff(evaluate_rhs(k22, u), conservative) < 1e-8);
}

TEST_CASE("presets vanish at zero") {
  for (const auto& name : PresetCatalogue::builtin().names()) {
    const auto& p = preset(name);
    if (!p.spec.claims_a3()) continue;
    auto zero = StateFunction::constant(p.default_grid(), 0.0);
    try {
      CHECK(evaluate_rhs(p.spec, zero).max_abs() == 0.0);
    } catch (const EvaluationError&) {
      FAIL("zero state not evaluable for " << name);
    }
  }
}

TEST_CASE("non-finite values raise an evaluation error") {
  NonlinearitySpec s("logarithm", "ln(z0)");
  auto u = on_circle([](double x) { return std::sin(x); });
  CHECK_THROWS_AS(evaluate_rhs(s, u), EvaluationError);
}

TEST_CASE("dispersion lambda") {
  CHECK(dispersion_lambda(preset("kdv").spec, on_circle([](double x) { return std::sin(x); })) == 1.0);
  CHECK(dispersion_lambda(preset("k22").spec, on_circle([](double) { return 2.0; })) == doctest::Approx(0.25));
  CHECK(dispersion_lambda(preset("harry_dym").spec, on_circle([](double x) { return 2 + std::sin(x); })) ==
        doctest::Approx(1.0));
  CHECK(std::isinf(dispersion_lambda(preset("harry_dym").spec, on_circle([](double) { return 0.0; }))));
  // lambda >= 1 / max |f_z3|
  const auto& k22 = preset("k22").spec;
  for (unsigned seed = 0; seed < 20; ++seed) {
    auto v = band_limited(SpectralGrid(2 * kPi, 64), 5, seed, 0.2) + StateFunction::constant(SpectralGrid(2 * kPi, 64), 2.0);
    auto a3 = partial_field(k22, PartialKey({Slot::Z3}), v);
    CHECK(dispersion_lambda(k22, v) >= 1.0 / a3.max_abs());
  }
}

TEST_CASE("modified diffusion ratio") {
  CHECK(modified_diffusion_ratio(preset("kdv").spec, on_circle([](double x) { return std::sin(x); })).max_abs() == 0.0);
  auto u = on_circle([](double x) { return 2 + std::sin(x); });
  auto gm = modified_diffusion_ratio(preset("k22").spec, u);
  auto expect = on_circle([](double x) { return 3 * std::cos(x) / (2 + std::sin(x)); });
  CHECK(max_diff(gm, expect) < 1e-12);
  auto dlog = derivative(on_circle([](double x) { return 3 * std::log(2 + std::sin(x)); }), 1);
  CHECK(max_diff(gm, dlog) < 1e-8);
  auto p = on_circle([](double x) { return 0.3 * std::cos(x); });
  CHECK(max_diff(modified_diffusion_ratio(preset("pilod_illposed").spec, p), p) < 1e-14);
  CHECK_THROWS_AS(modified_diffusion_ratio(preset("harry_dym").spec, on_circle([](double) { return 0.0; })),
                  DegeneracyError);
}

TEST_CASE("supplied partials agree with central differences") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> z(-5, 5);
  for (const auto& name : PresetCatalogue::builtin().names()) {
    const auto& spec = preset(name).spec;
    for (const auto& [key, expr] : spec.supplied_partials()) {
      if (key.order() != 1) continue;
      const Slot s = key.slots().front();
      int checked = 0;
      for (int trial = 0; trial < 1000; ++trial) {
        Point p{z(rng), z(rng), z(rng), z(rng), z(rng), z(rng)};
        // keep denominators of the logarithmic presets positive
        if (name == "k22" || name == "harry_dym") p[3] = std::abs(p[3]) + 0.5;
        const double h = 1e-5;
        Point a = p, b = p;
        a[static_cast<std::size_t>(arg_index(s))] += h;
        b[static_cast<std::size_t>(arg_index(s))] -= h;
        const double fd = (spec.value(a) - spec.value(b)) / (2 * h);
        const double got = spec.partial(key, p);
        CHECK(std::abs(got - fd) <= 1e-6 * std::max(1.0, std::abs(got)));
        ++checked;
      }
      CHECK(checked == 1000);
    }
  }
}

TEST_CASE("automatic partials match closed forms") {
  const auto& k22 = preset("k22").spec;
  const Point p{0.4, -1.2, 0.7, 1.9, 0.3, 0.0};
  CHECK(k22.partial(PartialKey::parse("f_z0z3"), p) == doctest::Approx(-2.0));
  CHECK(k22.partial(PartialKey::parse("f_z1z2"), p) == doctest::Approx(-6.0));
  CHECK(k22.partial(PartialKey::parse("f_z0z1"), p) == doctest::Approx(-2.0));
  CHECK(k22.partial(PartialKey::parse("f_z0z0"), p) == doctest::Approx(0.0));
  const auto& hd = preset("harry_dym").spec;
  CHECK(hd.partial(PartialKey::parse("f_z0z0z3"), p) == doctest::Approx(6 * p[3]));
  NonlinearitySpec manual("manual", "z0^2");
  manual.set_auto_partials(false);
  CHECK_THROWS_AS(manual.partial(PartialKey::parse("f_z0"), p), ConfigurationError);
  CHECK(manual.partial(PartialKey::parse("f_z3"), p) == 0.0);
}

TEST_CASE("time reversal") {
  NonlinearitySpec s("drift", "z3 + t*z0 + sin(x)");
  auto r = s.time_reversal();
  const Point p{0.2, 0.1, -0.4, 1.3, 0.8, 0.6};
  Point q = p;
  q[5] = -p[5];
  CHECK(r.value(p) == doctest::Approx(-s.value(q)));
  CHECK(r.partial(PartialKey::parse("f_t"), p) == doctest::Approx(s.partial(PartialKey::parse("f_t"), q)));
  CHECK(r.time_reversed());
}

TEST_CASE("admissibility of presets") {
  auto report = [](const std::string& n) {
    const auto& p = preset(n);
    return check_admissibility(p.spec, p.sample_states(p.default_grid(), 4, 5));
  };
  auto kdv = report("kdv");
  CHECK(kdv.all_pass());
  auto pilod = report("pilod_illposed");
  CHECK(pilod.a1.pass);
  CHECK(pilod.a3.pass);
  CHECK_FALSE(pilod.a2.pass);
  auto back = report("linear_backwards");
  CHECK_FALSE(back.a2.pass);
  CHECK(back.a2.detail.find("ramp") != std::string::npos);
  CHECK(report("k22").all_pass());
  CHECK(report("linear_gauged").all_pass());
  CHECK(report("harry_dym").all_pass());
}

TEST_CASE("decomposition residual on many random states") {
  for (const char* n : {"k22", "linear_gauged"}) {
    const auto& p = preset(n);
    auto grid = p.default_grid();
    auto states = p.sample_states(grid, 100, 17);
    auto r = check_admissibility(p.spec, states);
    CHECK(r.a2.pass);
    CHECK(r.a2.metric <= 1e-8);
  }
}

TEST_CASE("constant decomposition residual is a failure") {
  NonlinearitySpec s("shifted", "z3 + z2");
  s.set_decomposition("0", "0");
  std::vector<StateFunction> samples{on_circle([](double x) { return std::sin(x); })};
  auto r = check_admissibility(s, samples);
  CHECK_FALSE(r.a2.pass);
}

TEST_CASE("preset files") {
  const std::string text =
      "# custom\n"
      "name = quad\n"
      "f = -z3 - z0*z1   # Burgers-KdV\n"
      "f_z3 = -1\n"
      "f_z0 = -z1\n"
      "f_z1 = -z0\n"
      "g_D = 0\n"
      "g_H = 0\n"
      "claims_A2 = true\n"
      "claims_A3 = true\n"
      "linear = -1 0 0 0\n"
      "data = exp(-(x - L/2)^2)\n"
      "L = 16*pi\n"
      "N = 128\n";
  auto p = parse_preset_config(text);
  CHECK(p.spec.name() == "quad");
  CHECK(p.n_modes == 128);
  CHECK(p.length == doctest::Approx(16 * kPi));
  CHECK(p.spec.linear_part().has_value());
  CHECK((*p.spec.linear_part())[3] == -1.0);
  auto u = p.initial_data(p.default_grid());
  CHECK(u.max_abs() == doctest::Approx(1.0));
  CHECK(check_admissibility(p.spec, {u}).all_pass());
  CHECK_THROWS_AS(parse_preset_config("f = z0\nbogus = 1\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_preset_config("f = z0 +\n"), ConfigurationError);
  CHECK_THROWS_AS(parse_preset_config("no equals sign\n"), ConfigurationError);
  CHECK_THROWS_AS(load_preset_config("/nonexistent/preset.cfg"), ConfigurationError);
}
