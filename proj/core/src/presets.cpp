#include <cmath>
#include <numbers>
#include <random>

#include "dforge/errors.hpp"
#include "dforge/nonlinearity.hpp"

namespace dforge {

namespace {

constexpr double kPi = std::numbers::pi;

Preset kdv() {
  NonlinearitySpec s("kdv", "-z3 - 6*z0*z1");
  s.supply_partial("f_z3", "-1").supply_partial("f_z2", "0").supply_partial("f_z1", "-6*z0");
  s.supply_partial("f_z0", "-6*z1").supply_partial("f_x", "0").supply_partial("f_t", "0");
  s.set_decomposition("0", "0").set_claims(true, true).set_linear_part({0, 0, 0, -1});
  return {s, "0.5*sech(0.5*(x - L/2))^2", 64 * kPi, 512, "u_t = -u_xxx - 6 u u_x"};
}

Preset k22() {
  NonlinearitySpec s("k22", "-2*z0*z3 - 6*z1*z2 - 2*z0*z1");
  s.supply_partial("f_z3", "-2*z0").supply_partial("f_z2", "-6*z1");
  s.supply_partial("f_z1", "-6*z2 - 2*z0").supply_partial("f_z0", "-2*z3 - 2*z1");
  s.supply_partial("f_x", "0").supply_partial("f_t", "0");
  s.set_decomposition("3*ln(z0)", "0").set_claims(true, true);
  return {s, "2 + 0.1*exp(-(x - L/2)^2)", 16 * kPi, 256, "u_t = -(u^2)_xxx - (u^2)_x, positive data"};
}

Preset harry_dym() {
  NonlinearitySpec s("harry_dym", "z0^3*z3");
  s.supply_partial("f_z3", "z0^3").supply_partial("f_z2", "0").supply_partial("f_z1", "0");
  s.supply_partial("f_z0", "3*z0^2*z3").supply_partial("f_x", "0").supply_partial("f_t", "0");
  s.set_decomposition("0", "0").set_claims(true, true);
  return {s, "2 + 0.2*exp(-(x - L/2)^2)", 16 * kPi, 256, "u_t = u^3 u_xxx"};
}

Preset pilod_illposed() {
  NonlinearitySpec s("pilod_illposed", "-z3 - z0*z2");
  s.supply_partial("f_z3", "-1").supply_partial("f_z2", "-z0").supply_partial("f_z1", "0");
  s.supply_partial("f_z0", "-z2").supply_partial("f_x", "0").supply_partial("f_t", "0");
  s.set_decomposition("0", "z0").set_claims(false, true).set_linear_part({0, 0, 0, -1});
  return {s, "0.5*exp(-(x - L/2)^2) + 0.001*sin(8*x)", 16 * kPi, 256,
          "u_t = -u_xxx - u u_xx (modified diffusion ratio u is not admissible)"};
}

Preset linear_backwards() {
  NonlinearitySpec s("linear_backwards", "z3 - z2");
  s.supply_partial("f_z3", "1").supply_partial("f_z2", "-1").supply_partial("f_z1", "0");
  s.supply_partial("f_z0", "0").supply_partial("f_x", "0").supply_partial("f_t", "0");
  s.set_claims(false, true).set_linear_part({0, 0, -1, 1});
  return {s, "sin(4*x)", 2 * kPi, 16, "u_t = u_xxx - u_xx (backwards diffusion)"};
}

Preset linear_gauged() {
  NonlinearitySpec s("linear_gauged", "z3 + 3*cos(x)*z2");
  s.supply_partial("f_z3", "1").supply_partial("f_z2", "3*cos(x)").supply_partial("f_z1", "0");
  s.supply_partial("f_z0", "0").supply_partial("f_x", "-3*sin(x)*z2").supply_partial("f_t", "0");
  s.set_decomposition("3*sin(x)", "0").set_claims(true, true).set_linear_part({0, 0, 0, 1});
  return {s, "exp(-(x - L/2)^2)*cos(6*x)", 8 * kPi, 256,
          "u_t = u_xxx + 3 cos(x) u_xx (oscillatory diffusion of derivative form)"};
}

}  // namespace

StateFunction Preset::initial_data(const SpectralGrid& grid) const {
  const auto e = Expression::parse(data, {"x", "L"});
  const double L = grid.length();
  return StateFunction::sample(grid, [&](double x) {
    const double v[2] = {x, L};
    return e(v);
  });
}

std::vector<StateFunction> Preset::sample_states(const SpectralGrid& grid, int count, unsigned seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto base = initial_data(grid);
  const double scale = 0.1 * std::max(1.0, base.max_abs()) / 4.0;
  std::vector<StateFunction> out{base};
  for (int c = 0; c < count; ++c) {
    std::vector<Complex> spec(base.spectrum().begin(), base.spectrum().end());
    for (int k = 1; k <= 4 && k < static_cast<int>(spec.size()); ++k)
      spec[static_cast<std::size_t>(k)] += 0.5 * scale * Complex(normal(rng), normal(rng));
    out.push_back(StateFunction::from_spectrum(grid, std::move(spec)));
  }
  return out;
}

const PresetCatalogue& PresetCatalogue::builtin() {
  static const PresetCatalogue catalogue = [] {
    PresetCatalogue c;
    for (auto p : {kdv(), k22(), harry_dym(), pilod_illposed(), linear_backwards(), linear_gauged()})
      c.add(std::move(p));
    return c;
  }();
  return catalogue;
}

std::vector<std::string> PresetCatalogue::names() const {
  std::vector<std::string> n;
  for (const auto& [name, p] : presets_) n.push_back(name);
  return n;
}

const Preset& PresetCatalogue::get(const std::string& name) const {
  if (auto it = presets_.find(name); it != presets_.end()) return it->second;
  std::string msg = "unknown preset '" + name + "'; available presets:";
  for (const auto& n : names()) msg += " " + n;
  throw ConfigurationError(msg);
}

void PresetCatalogue::add(Preset p) {
  const std::string name = p.spec.name();
  presets_.insert_or_assign(name, std::move(p));
}

}  // namespace dforge
