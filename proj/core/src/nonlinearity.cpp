#include "dforge/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dforge/errors.hpp"

namespace dforge {

namespace {

constexpr double kDegenerate = 1e-14;

const char* slot_token(Slot s) {
  switch (s) {
    case Slot::T: return "t";
    case Slot::X: return "x";
    case Slot::Z0: return "z0";
    case Slot::Z1: return "z1";
    case Slot::Z2: return "z2";
    case Slot::Z3: return "z3";
  }
  return "?";
}

std::vector<Slot> distinct(const std::vector<Slot>& s) {
  std::vector<Slot> d(s);
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

}  // namespace

const std::vector<std::string>& argument_names() {
  static const std::vector<std::string> names{"z3", "z2", "z1", "z0", "x", "t"};
  return names;
}

PartialKey::PartialKey(std::vector<Slot> slots) : slots_(std::move(slots)) {
  std::sort(slots_.begin(), slots_.end());
}

PartialKey PartialKey::parse(const std::string& name) {
  std::string s = name;
  if (s.rfind("f_", 0) == 0) s = s.substr(2);
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '_') continue;
    if (c == 'x') slots.push_back(Slot::X);
    else if (c == 't') slots.push_back(Slot::T);
    else if (c == 'z' && i + 1 < s.size() && s[i + 1] >= '0' && s[i + 1] <= '3') {
      slots.push_back(z_slot(s[i + 1] - '0'));
      ++i;
    } else {
      throw ConfigurationError("malformed partial derivative name '" + name + "'");
    }
  }
  if (slots.empty()) throw ConfigurationError("partial derivative name '" + name + "' names no slot");
  return PartialKey(std::move(slots));
}

int PartialKey::count(Slot s) const {
  return static_cast<int>(std::count(slots_.begin(), slots_.end(), s));
}

std::string PartialKey::name() const {
  std::string out = "f";
  if (!slots_.empty()) out += '_';
  for (Slot s : slots_) out += slot_token(s);
  return out;
}

PartialKey PartialKey::with(Slot s) const {
  auto v = slots_;
  v.push_back(s);
  return PartialKey(std::move(v));
}

NonlinearitySpec::NonlinearitySpec(std::string name, const std::string& f)
    : name_(std::move(name)), f_(Expression::parse(f, argument_names())) {}

NonlinearitySpec& NonlinearitySpec::supply_partial(const std::string& key, const std::string& expr) {
  const auto k = PartialKey::parse(key);
  supplied_[k] = Expression::parse(expr, argument_names());
  return *this;
}

NonlinearitySpec& NonlinearitySpec::set_decomposition(const std::string& g_d, const std::string& g_h) {
  auto gd = Expression::parse(g_d, argument_names());
  if (gd.uses(arg_index(Slot::Z3))) throw ConfigurationError("g_D may not depend on z3");
  g_d_ = std::move(gd);
  g_h_ = Expression::parse(g_h, argument_names());
  return *this;
}

NonlinearitySpec& NonlinearitySpec::set_claims(bool a2, bool a3) {
  claims_a2_ = a2;
  claims_a3_ = a3;
  return *this;
}

NonlinearitySpec& NonlinearitySpec::set_linear_part(std::array<double, 4> c) {
  linear_part_ = c;
  return *this;
}

NonlinearitySpec& NonlinearitySpec::set_auto_partials(bool on) {
  auto_partials_ = on;
  return *this;
}

bool NonlinearitySpec::depends_on(Slot s) const { return f_.uses(arg_index(s)); }

Point NonlinearitySpec::reflect(const Point& p) const {
  Point q = p;
  if (reversed_) q[5] = -q[5];
  return q;
}

double NonlinearitySpec::value(const Point& p) const {
  const double v = f_(reflect(p));
  return reversed_ ? -v : v;
}

double NonlinearitySpec::supplied_value(const Expression& e, const PartialKey& key, const Point& p) const {
  const double v = e(reflect(p));
  if (!reversed_) return v;
  return (key.count(Slot::T) % 2 == 0) ? -v : v;
}

Taylor NonlinearitySpec::evaluate(std::span<const Taylor> args) const {
  if (!reversed_) return f_.evaluate(args);
  std::vector<Taylor> a(args.begin(), args.end());
  a[5] = -a[5];
  return -f_.evaluate<Taylor>(a);
}

double NonlinearitySpec::partial(const PartialKey& key, const Point& p) const {
  if (key.order() == 0) return value(p);
  if (auto it = supplied_.find(key); it != supplied_.end()) return supplied_value(it->second, key, p);
  const auto vars = distinct(key.slots());
  for (Slot s : vars)
    if (!depends_on(s)) return 0.0;
  if (!auto_partials_)
    throw ConfigurationError("specification '" + name_ + "' does not supply " + key.name());
  auto layout = TaylorLayout::get(static_cast<int>(vars.size()), key.order());
  std::vector<Taylor> args;
  args.reserve(6);
  for (int a = 0; a < 6; ++a) args.emplace_back(layout, p[static_cast<std::size_t>(a)]);
  std::vector<int> exps(vars.size());
  for (std::size_t v = 0; v < vars.size(); ++v) {
    args[static_cast<std::size_t>(arg_index(vars[v]))] =
        Taylor::variable(layout, static_cast<int>(v), p[static_cast<std::size_t>(arg_index(vars[v]))]);
    exps[v] = key.count(vars[v]);
  }
  return evaluate(args).partial(exps);
}

double NonlinearitySpec::g_d(const Point& p) const {
  if (!g_d_) throw ConfigurationError("specification '" + name_ + "' has no decomposition");
  return (*g_d_)(reflect(p));
}

double NonlinearitySpec::g_h(const Point& p) const {
  if (!g_h_) throw ConfigurationError("specification '" + name_ + "' has no decomposition");
  return (*g_h_)(reflect(p));
}

std::array<double, 4> NonlinearitySpec::g_h_gradient(const Point& p) const {
  if (!g_h_) throw ConfigurationError("specification '" + name_ + "' has no decomposition");
  auto layout = TaylorLayout::get(4, 1);
  const Point q = reflect(p);
  std::vector<Taylor> args;
  for (int a = 0; a < 6; ++a)
    args.push_back(a < 4 ? Taylor::variable(layout, a, q[static_cast<std::size_t>(a)])
                         : Taylor(layout, q[static_cast<std::size_t>(a)]));
  const Taylor g = g_h_->evaluate<Taylor>(args);
  std::array<double, 4> grad{};
  for (int j = 0; j < 4; ++j) {
    std::vector<int> e(4, 0);
    e[static_cast<std::size_t>(3 - j)] = 1;
    grad[static_cast<std::size_t>(j)] = g.partial(e);
  }
  return grad;
}

NonlinearitySpec NonlinearitySpec::time_reversal() const {
  NonlinearitySpec r = *this;
  r.reversed_ = !reversed_;
  if (r.linear_part_)
    for (double& c : *r.linear_part_) c = -c;
  return r;
}

ArgumentFields argument_fields(const StateFunction& u) {
  ArgumentFields a{u.grid(), u.time(), {}};
  for (int j = 0; j < 4; ++j) {
    auto d = dealiased_derivative(u, j);
    a.z[static_cast<std::size_t>(j)].assign(d.values().begin(), d.values().end());
  }
  return a;
}

PartialTable::PartialTable(const NonlinearitySpec& spec, const ArgumentFields& args, int order)
    : order_(order), n_(args.size()), auto_(spec.auto_partials()), spec_name_(spec.name()) {
  for (Slot s : {Slot::X, Slot::Z0, Slot::Z1, Slot::Z2, Slot::Z3})
    if (spec.depends_on(s)) active_.push_back(s);
  const int taylor_order = auto_ ? order : 0;
  layout_ = TaylorLayout::get(std::max<int>(1, static_cast<int>(active_.size())), taylor_order);
  monomials_.assign(layout_->size(), std::vector<double>(n_));

  std::vector<Taylor> targs;
  for (int a = 0; a < 6; ++a) targs.emplace_back(layout_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const Point p = args.point(i);
    for (int a = 0; a < 6; ++a) targs[static_cast<std::size_t>(a)] = Taylor(layout_, p[static_cast<std::size_t>(a)]);
    for (std::size_t v = 0; v < active_.size(); ++v) {
      const auto a = static_cast<std::size_t>(arg_index(active_[v]));
      targs[a] = Taylor::variable(layout_, static_cast<int>(v), p[a]);
    }
    const Taylor f = spec.evaluate(targs);
    for (std::size_t m = 0; m < layout_->size(); ++m) monomials_[m][i] = f[m] * layout_->factorial(m);
  }

  for (const auto& [key, expr] : spec.supplied_partials()) {
    if (key.order() > order || key.count(Slot::T) > 0) continue;
    std::vector<double> v(n_);
    for (std::size_t i = 0; i < n_; ++i) v[i] = spec.partial(key, args.point(i));
    supplied_[key] = std::move(v);
  }
}

std::span<const double> PartialTable::field(const PartialKey& key) const {
  if (key.count(Slot::T) > 0) throw ArgumentError("partial tables do not carry t-derivatives");
  if (key.order() > order_) throw ArgumentError("partial order exceeds table order");
  if (auto it = supplied_.find(key); it != supplied_.end()) return it->second;
  std::vector<int> exps(static_cast<std::size_t>(layout_->nvars()), 0);
  for (Slot s : key.slots()) {
    auto it = std::find(active_.begin(), active_.end(), s);
    if (it == active_.end()) return {};
    ++exps[static_cast<std::size_t>(it - active_.begin())];
  }
  const long m = layout_->index_of(exps);
  if (m < 0)
    throw ConfigurationError("specification '" + spec_name_ + "' does not supply " + key.name());
  return monomials_[static_cast<std::size_t>(m)];
}

StateFunction evaluate_rhs(const NonlinearitySpec& spec, const StateFunction& u) {
  const auto args = argument_fields(u);
  std::vector<double> out(args.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = spec.value(args.point(i));
    if (!std::isfinite(out[i])) throw EvaluationError("non-finite value of f in '" + spec.name() + "'", i);
  }
  return StateFunction(u.grid(), std::move(out), u.time());
}

StateFunction partial_field(const NonlinearitySpec& spec, const PartialKey& key, const StateFunction& u) {
  const auto args = argument_fields(u);
  std::vector<double> out(args.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = spec.partial(key, args.point(i));
    if (!std::isfinite(out[i]))
      throw EvaluationError("non-finite value of " + key.name() + " in '" + spec.name() + "'", i);
  }
  return StateFunction(u.grid(), std::move(out), u.time());
}

double dispersion_lambda(const NonlinearitySpec& spec, const StateFunction& u) {
  const auto a3 = partial_field(spec, PartialKey({Slot::Z3}), u);
  double lambda = 0.0;
  for (double v : a3.values()) {
    if (std::abs(v) <= kDegenerate) return std::numeric_limits<double>::infinity();
    lambda = std::max(lambda, 1.0 / std::abs(v));
  }
  return lambda;
}

StateFunction modified_diffusion_ratio(const NonlinearitySpec& spec, const StateFunction& u) {
  const auto a3 = partial_field(spec, PartialKey({Slot::Z3}), u);
  const auto a2 = partial_field(spec, PartialKey({Slot::Z2}), u);
  std::vector<double> g(a3.values().size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(a3.values()[i]) <= kDegenerate)
      throw DegeneracyError("dispersion coefficient vanishes at node " + std::to_string(i));
    g[i] = a2.values()[i] / a3.values()[i];
  }
  return StateFunction(u.grid(), std::move(g), u.time());
}

namespace {

ConditionCheck check_a1(const NonlinearitySpec& spec, const std::vector<StateFunction>& samples,
                        unsigned seed, int random_points) {
  ConditionCheck c;
  std::mt19937_64 rng(seed);
  const double L = samples.front().grid().length();
  std::uniform_real_distribution<double> zdist(-5.0, 5.0), xdist(0.0, L), tdist(0.0, 1.0);

  struct Probe {
    PartialKey key, lower;
    Slot slot;
  };
  std::vector<Probe> checks;
  for (const auto& [key, expr] : spec.supplied_partials()) {
    auto s = key.slots();
    const Slot last = s.back();
    s.pop_back();
    checks.push_back({key, PartialKey(s), last});
  }
  if (spec.auto_partials())
    for (Slot s : {Slot::Z3, Slot::Z2, Slot::Z1, Slot::Z0, Slot::X, Slot::T})
      if (!spec.has_supplied(PartialKey({s}))) checks.push_back({PartialKey({s}), PartialKey(), s});

  constexpr double h = 1e-5;
  double worst = 0.0;
  std::string worst_key;
  int used = 0;
  for (int trial = 0; trial < random_points; ++trial) {
    Point p{zdist(rng), zdist(rng), zdist(rng), zdist(rng), xdist(rng), tdist(rng)};
    for (const auto& [key, lower, slot] : checks) {
      const auto a = static_cast<std::size_t>(arg_index(slot));
      Point pp = p, pm = p;
      pp[a] += h;
      pm[a] -= h;
      const double exact = spec.partial(key, p);
      const double fd = (spec.partial(lower, pp) - spec.partial(lower, pm)) / (2.0 * h);
      if (!std::isfinite(exact) || !std::isfinite(fd)) continue;
      ++used;
      const double err = std::abs(exact - fd) / std::max(1.0, std::abs(exact));
      if (err > worst) {
        worst = err;
        worst_key = key.name();
      }
    }
  }

  double bound = 0.0;
  bool finite = true;
  for (const auto& u : samples) {
    const auto args = argument_fields(u);
    for (std::size_t i = 0; i < args.size(); ++i) {
      const Point p = args.point(i);
      double v = std::abs(spec.value(p));
      for (Slot s : {Slot::Z3, Slot::Z2, Slot::Z1, Slot::Z0, Slot::X})
        v = std::max(v, std::abs(spec.partial(PartialKey({s}), p)));
      if (!std::isfinite(v)) finite = false;
      else bound = std::max(bound, v);
    }
  }

  c.metric = worst;
  c.pass = worst <= 1e-6 && finite;
  std::ostringstream os;
  os << "partial consistency worst relative error " << worst;
  if (!worst_key.empty()) os << " (" << worst_key << ")";
  os << " over " << used << " evaluations; max |f|, |∇f| on samples " << bound;
  if (!finite) os << "; non-finite values on samples";
  c.detail = os.str();
  return c;
}

ConditionCheck check_a3(const NonlinearitySpec& spec, const std::vector<StateFunction>& samples) {
  ConditionCheck c;
  double worst = 0.0;
  for (double x : samples.front().grid().nodes())
    for (double t : {0.0, 0.25, 0.5, 1.0}) worst = std::max(worst, std::abs(spec.value({0, 0, 0, 0, x, t})));
  c.metric = worst;
  c.pass = worst <= 1e-14;
  c.detail = c.pass ? "f vanishes at z = 0" : "f(0, x, t) is nonzero";
  return c;
}

ConditionCheck check_a2(const NonlinearitySpec& spec, const std::vector<StateFunction>& samples) {
  ConditionCheck c;
  double residual = 0.0, ramp = 0.0;
  for (const auto& u : samples) {
    StateFunction gm = [&] {
      try {
        return modified_diffusion_ratio(spec, u);
      } catch (const DegeneracyError&) {
        return StateFunction::constant(u.grid(), std::numeric_limits<double>::infinity());
      }
    }();
    if (!std::isfinite(gm.max_abs())) {
      c.pass = false;
      c.metric = std::numeric_limits<double>::infinity();
      c.detail = "dispersion coefficient vanishes on a sample state";
      return c;
    }
    const auto args = argument_fields(u);
    std::vector<double> gh(args.size(), 0.0), gd(args.size(), 0.0);
    if (spec.has_decomposition())
      for (std::size_t i = 0; i < args.size(); ++i) {
        gd[i] = spec.g_d(args.point(i));
        gh[i] = spec.g_h(args.point(i));
      }
    std::vector<double> rest(args.size());
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = gm.values()[i] - gh[i];
    ramp = std::max(ramp, std::abs(antiderivative_from_zero(StateFunction(u.grid(), rest)).slope));
    if (spec.has_decomposition()) {
      const auto dgd = derivative(StateFunction(u.grid(), gd), 1);
      double r = 0.0;
      for (std::size_t i = 0; i < rest.size(); ++i) r = std::max(r, std::abs(rest[i] - dgd.values()[i]));
      residual = std::max(residual, r / std::max(1.0, gm.max_abs()));
    }
  }
  if (ramp > 1e-10) {
    c.pass = false;
    c.metric = ramp;
    c.detail = "Mizohata ramp: mean of g_M - g_H is " + std::to_string(ramp) +
               ", its antiderivative is not periodic";
    return c;
  }
  if (!spec.has_decomposition()) {
    c.pass = false;
    c.metric = std::numeric_limits<double>::infinity();
    c.detail = "no (g_D, g_H) decomposition supplied";
    return c;
  }
  double vanish = 0.0;
  for (double x : samples.front().grid().nodes())
    for (double t : {0.0, 0.5, 1.0}) {
      const Point zero{0, 0, 0, 0, x, t};
      vanish = std::max(vanish, std::abs(spec.g_h(zero)));
      for (double g : spec.g_h_gradient(zero)) vanish = std::max(vanish, std::abs(g));
    }
  c.metric = residual;
  std::ostringstream os;
  os << "decomposition residual " << residual << ", max |g_H|, |grad g_H| at z = 0: " << vanish;
  c.pass = residual <= 1e-8 && vanish <= 1e-12;
  if (vanish > 1e-12) os << " (g_H is not cubically vanishing)";
  c.detail = os.str();
  return c;
}

}  // namespace

AdmissibilityReport check_admissibility(const NonlinearitySpec& spec,
                                        const std::vector<StateFunction>& samples, unsigned seed,
                                        int random_points) {
  if (samples.empty()) throw ArgumentError("admissibility check needs sample states");
  AdmissibilityReport r;
  r.a1 = check_a1(spec, samples, seed, random_points);
  r.a2 = check_a2(spec, samples);
  r.a3 = check_a3(spec, samples);
  return r;
}

}  // namespace dforge
