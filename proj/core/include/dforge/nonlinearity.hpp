#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dforge/expression.hpp"
#include "dforge/spectral.hpp"
#include "dforge/taylor.hpp"

namespace dforge {

/// Argument slots of f. Z_j carries ∂x^j u; X and T are the explicit x and t slots.
enum class Slot : int { T = -2, X = -1, Z0 = 0, Z1 = 1, Z2 = 2, Z3 = 3 };

/// Position of a slot in the argument tuple (z3, z2, z1, z0, x, t).
constexpr int arg_index(Slot s) {
  const int j = static_cast<int>(s);
  return j >= 0 ? 3 - j : (j == -1 ? 4 : 5);
}

constexpr Slot z_slot(int j) { return static_cast<Slot>(j); }

/// Argument tuple (z3, z2, z1, z0, x, t).
using Point = std::array<double, 6>;

/// Variable names in argument order, as accepted by expression strings.
const std::vector<std::string>& argument_names();

/// Multiset of slots naming a partial derivative, e.g. f_xz0z0.
class PartialKey {
 public:
  PartialKey() = default;
  explicit PartialKey(std::vector<Slot> slots);
  static PartialKey parse(const std::string& name);

  const std::vector<Slot>& slots() const noexcept { return slots_; }
  int order() const noexcept { return static_cast<int>(slots_.size()); }
  int count(Slot s) const;
  std::string name() const;
  PartialKey with(Slot s) const;

  friend bool operator<(const PartialKey& a, const PartialKey& b) { return a.slots_ < b.slots_; }
  friend bool operator==(const PartialKey& a, const PartialKey& b) { return a.slots_ == b.slots_; }

 private:
  std::vector<Slot> slots_;
};

/// f(z3, z2, z1, z0, x, t) with supplied partials, optional (g_D, g_H) decomposition and flags.
///
/// Partials that are not supplied are produced by truncated Taylor arithmetic on f
/// when auto partials are enabled; otherwise requesting them is a configuration error.
class NonlinearitySpec {
 public:
  NonlinearitySpec(std::string name, const std::string& f);

  NonlinearitySpec& supply_partial(const std::string& key, const std::string& expr);
  NonlinearitySpec& set_decomposition(const std::string& g_d, const std::string& g_h);
  NonlinearitySpec& set_claims(bool a2, bool a3);
  /// Constant coefficients c_j of the linear part Σ c_j ∂x^j u treated exactly by the stepper.
  NonlinearitySpec& set_linear_part(std::array<double, 4> c);
  NonlinearitySpec& set_auto_partials(bool on);

  const std::string& name() const noexcept { return name_; }
  const Expression& f() const noexcept { return f_; }
  bool claims_a2() const noexcept { return claims_a2_; }
  bool claims_a3() const noexcept { return claims_a3_; }
  bool auto_partials() const noexcept { return auto_partials_; }
  bool time_reversed() const noexcept { return reversed_; }
  const std::optional<std::array<double, 4>>& linear_part() const noexcept { return linear_part_; }
  bool has_decomposition() const noexcept { return g_d_.has_value(); }
  bool depends_on(Slot s) const;
  bool has_supplied(const PartialKey& key) const { return supplied_.count(key) != 0; }
  const std::map<PartialKey, Expression>& supplied_partials() const noexcept { return supplied_; }

  double value(const Point& p) const;
  double partial(const PartialKey& key, const Point& p) const;
  double g_d(const Point& p) const;
  double g_h(const Point& p) const;
  /// ∂_{z_j} g_H at p for j = 0..3.
  std::array<double, 4> g_h_gradient(const Point& p) const;

  /// f on Taylor arguments ordered as (z3, z2, z1, z0, x, t).
  Taylor evaluate(std::span<const Taylor> args) const;

  /// −f(…, −t): the equation for the reversed time direction.
  NonlinearitySpec time_reversal() const;

 private:
  double supplied_value(const Expression& e, const PartialKey& key, const Point& p) const;
  Point reflect(const Point& p) const;

  std::string name_;
  Expression f_;
  std::map<PartialKey, Expression> supplied_;
  std::optional<Expression> g_d_, g_h_;
  bool claims_a2_ = false;
  bool claims_a3_ = false;
  bool auto_partials_ = true;
  bool reversed_ = false;
  std::optional<std::array<double, 4>> linear_part_;
};

/// Dealiased derivative fields ∂x^j u (j = 0..3) plus nodes and time: the arguments of f on a grid.
struct ArgumentFields {
  SpectralGrid grid;
  double t = 0.0;
  std::array<std::vector<double>, 4> z;

  Point point(std::size_t i) const {
    return {z[3][i], z[2][i], z[1][i], z[0][i], grid.nodes()[i], t};
  }
  std::size_t size() const { return z[0].size(); }
};

ArgumentFields argument_fields(const StateFunction& u);

/// Partial derivatives of f of total order ≤ K (in z and x slots) evaluated on a grid.
class PartialTable {
 public:
  PartialTable(const NonlinearitySpec& spec, const ArgumentFields& args, int order);

  int order() const noexcept { return order_; }
  /// Field of ∂_key f at each node; an empty span denotes the zero field.
  std::span<const double> field(const PartialKey& key) const;

 private:
  int order_;
  std::size_t n_;
  std::vector<Slot> active_;
  std::shared_ptr<const TaylorLayout> layout_;
  std::vector<std::vector<double>> monomials_;
  std::map<PartialKey, std::vector<double>> supplied_;
  bool auto_ = true;
  std::string spec_name_;
};

/// f(∂x³u, ∂x²u, ∂xu, u, x, t) pointwise with dealiased derivative inputs.
StateFunction evaluate_rhs(const NonlinearitySpec& spec, const StateFunction& u);

/// Field of ∂_key f along the state u.
StateFunction partial_field(const NonlinearitySpec& spec, const PartialKey& key, const StateFunction& u);

/// max 1/|f_z3| over the grid, or +∞ if f_z3 vanishes (|f_z3| ≤ 1e-14) at some node.
double dispersion_lambda(const NonlinearitySpec& spec, const StateFunction& u);

/// g_M = f_z2 / f_z3 along u.
StateFunction modified_diffusion_ratio(const NonlinearitySpec& spec, const StateFunction& u);

struct ConditionCheck {
  bool pass = false;
  double metric = 0.0;
  std::string detail;
};

struct AdmissibilityReport {
  ConditionCheck a1, a2, a3;
  bool all_pass() const { return a1.pass && a2.pass && a3.pass; }
};

AdmissibilityReport check_admissibility(const NonlinearitySpec& spec,
                                        const std::vector<StateFunction>& samples,
                                        unsigned seed = 20240517u, int random_points = 1000);

/// An equation together with default data and grid.
struct Preset {
  NonlinearitySpec spec;
  std::string data;
  double length;
  int n_modes;
  std::string description;

  /// Samples the data expression (variables x and L) on the given grid.
  StateFunction initial_data(const SpectralGrid& grid) const;
  SpectralGrid default_grid() const { return SpectralGrid(length, n_modes); }
  /// The default data plus `count` random smooth low-mode perturbations of relative size 0.1.
  std::vector<StateFunction> sample_states(const SpectralGrid& grid, int count, unsigned seed) const;
};

class PresetCatalogue {
 public:
  static const PresetCatalogue& builtin();

  std::vector<std::string> names() const;
  bool contains(const std::string& name) const { return presets_.count(name) != 0; }
  /// Throws ConfigurationError listing the catalogue for unknown names.
  const Preset& get(const std::string& name) const;
  void add(Preset p);

 private:
  std::map<std::string, Preset> presets_;
};

/// Reads a key = value preset file (f, f_<slots>, g_D, g_H, partials, claims_A2, claims_A3,
/// linear, data, L, N, name, description).
Preset load_preset_config(const std::string& path);
Preset parse_preset_config(const std::string& text, const std::string& origin = "<string>");

}  // namespace dforge
