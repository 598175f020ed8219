#include "dforge/taylor.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>

#include "dforge/errors.hpp"

namespace dforge {

namespace {

long encode(std::span<const std::uint8_t> e, int base) {
  long key = 0;
  for (auto it = e.rbegin(); it != e.rend(); ++it) key = key * base + *it;
  return key;
}

}  // namespace

std::shared_ptr<const TaylorLayout> TaylorLayout::get(int nvars, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const TaylorLayout>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{nvars, order}];
  if (!slot) slot = std::make_shared<const TaylorLayout>(nvars, order);
  return slot;
}

TaylorLayout::TaylorLayout(int nvars, int order) : nvars_(nvars), order_(order) {
  if (nvars < 1 || nvars > 8 || order < 0 || order > 16)
    throw ArgumentError("unsupported Taylor layout");
  // Graded enumeration: all exponent vectors of degree d, for d = 0..order.
  std::vector<std::uint8_t> e(static_cast<std::size_t>(nvars), 0);
  for (int d = 0; d <= order; ++d) {
    std::vector<std::uint8_t> cur(static_cast<std::size_t>(nvars), 0);
    std::function<void(int, int)> rec = [&](int var, int left) {
      if (var == nvars - 1) {
        cur[static_cast<std::size_t>(var)] = static_cast<std::uint8_t>(left);
        exponents_.insert(exponents_.end(), cur.begin(), cur.end());
        degree_.push_back(d);
        return;
      }
      for (int p = left; p >= 0; --p) {
        cur[static_cast<std::size_t>(var)] = static_cast<std::uint8_t>(p);
        rec(var + 1, left - p);
      }
    };
    rec(0, d);
  }
  const int base = order + 1;
  long span = 1;
  for (int v = 0; v < nvars; ++v) span *= base;
  lookup_.assign(static_cast<std::size_t>(span), -1);
  factorial_.resize(size());
  for (std::size_t m = 0; m < size(); ++m) {
    auto ex = exponents(m);
    lookup_[static_cast<std::size_t>(encode(ex, base))] = static_cast<long>(m);
    double f = 1.0;
    for (auto p : ex)
      for (int q = 2; q <= p; ++q) f *= q;
    factorial_[m] = f;
  }
  std::vector<std::uint8_t> sum(static_cast<std::size_t>(nvars));
  for (std::size_t a = 0; a < size(); ++a) {
    for (std::size_t b = 0; b < size(); ++b) {
      if (degree_[a] + degree_[b] > order) break;
      auto ea = exponents(a);
      auto eb = exponents(b);
      for (int v = 0; v < nvars; ++v) sum[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(ea[v] + eb[v]);
      const long c = lookup_[static_cast<std::size_t>(encode(sum, base))];
      products_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                           static_cast<std::uint32_t>(c)});
    }
  }
}

long TaylorLayout::index_of(std::span<const int> exps) const {
  if (static_cast<int>(exps.size()) != nvars_) return -1;
  int total = 0;
  long key = 0;
  const int base = order_ + 1;
  for (int v = nvars_ - 1; v >= 0; --v) {
    if (exps[v] < 0) return -1;
    total += exps[v];
    if (total > order_) return -1;
    key = key * base + exps[v];
  }
  return lookup_[static_cast<std::size_t>(key)];
}

Taylor::Taylor(std::shared_ptr<const TaylorLayout> layout, double constant)
    : layout_(std::move(layout)), c_(layout_->size(), 0.0) {
  c_[0] = constant;
}

Taylor Taylor::variable(std::shared_ptr<const TaylorLayout> layout, int var, double value) {
  Taylor t(layout, value);
  if (layout->order() >= 1) {
    std::vector<int> e(static_cast<std::size_t>(layout->nvars()), 0);
    e[static_cast<std::size_t>(var)] = 1;
    t.c_[static_cast<std::size_t>(layout->index_of(e))] = 1.0;
  }
  return t;
}

double Taylor::partial(std::span<const int> exps) const {
  const long m = layout_->index_of(exps);
  if (m < 0) throw ArgumentError("partial derivative exceeds Taylor order");
  return c_[static_cast<std::size_t>(m)] * layout_->factorial(static_cast<std::size_t>(m));
}

Taylor& Taylor::operator+=(const Taylor& o) {
  for (std::size_t m = 0; m < c_.size(); ++m) c_[m] += o.c_[m];
  return *this;
}

Taylor& Taylor::operator-=(const Taylor& o) {
  for (std::size_t m = 0; m < c_.size(); ++m) c_[m] -= o.c_[m];
  return *this;
}

Taylor& Taylor::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Taylor operator*(const Taylor& a, const Taylor& b) {
  Taylor out(a.layout_, 0.0);
  for (const auto& t : a.layout_->products()) out.c_[t.c] += a.c_[t.a] * b.c_[t.b];
  return out;
}

Taylor Taylor::compose(std::span<const double> derivs) const {
  const int order = layout_->order();
  Taylor h = *this;
  h.c_[0] = 0.0;
  Taylor out(layout_, derivs[0]);
  Taylor power = h;
  double fact = 1.0;
  for (int m = 1; m <= order; ++m) {
    fact *= m;
    const double coef = derivs[static_cast<std::size_t>(m)] / fact;
    for (std::size_t i = 0; i < out.c_.size(); ++i) out.c_[i] += coef * power.c_[i];
    if (m < order) power = power * h;
  }
  return out;
}

namespace {

std::vector<double> power_derivs(double c, double p, int order) {
  std::vector<double> d(static_cast<std::size_t>(order) + 1);
  double coef = 1.0;
  for (int m = 0; m <= order; ++m) {
    d[static_cast<std::size_t>(m)] = coef * std::pow(c, p - m);
    coef *= (p - m);
  }
  return d;
}

}  // namespace

Taylor reciprocal(const Taylor& a) { return a.compose(power_derivs(a.constant(), -1.0, a.layout()->order())); }

Taylor operator/(const Taylor& a, const Taylor& b) { return a * reciprocal(b); }
Taylor operator/(double s, const Taylor& b) { return reciprocal(b) * s; }

Taylor exp(const Taylor& a) {
  std::vector<double> d(static_cast<std::size_t>(a.layout()->order()) + 1, std::exp(a.constant()));
  return a.compose(d);
}

Taylor log(const Taylor& a) {
  const int order = a.layout()->order();
  const double c = a.constant();
  std::vector<double> d(static_cast<std::size_t>(order) + 1);
  d[0] = std::log(c);
  double fact = 1.0;
  for (int m = 1; m <= order; ++m) {
    d[static_cast<std::size_t>(m)] = ((m % 2 == 1) ? 1.0 : -1.0) * fact / std::pow(c, m);
    fact *= m;
  }
  return a.compose(d);
}

namespace {

Taylor trig(const Taylor& a, int phase) {
  const int order = a.layout()->order();
  const double s = std::sin(a.constant()), c = std::cos(a.constant());
  const double cycle[4] = {s, c, -s, -c};
  std::vector<double> d(static_cast<std::size_t>(order) + 1);
  for (int m = 0; m <= order; ++m) d[static_cast<std::size_t>(m)] = cycle[(m + phase) % 4];
  return a.compose(d);
}

Taylor hyperbolic(const Taylor& a, int phase) {
  const int order = a.layout()->order();
  const double s = std::sinh(a.constant()), c = std::cosh(a.constant());
  std::vector<double> d(static_cast<std::size_t>(order) + 1);
  for (int m = 0; m <= order; ++m) d[static_cast<std::size_t>(m)] = ((m + phase) % 2 == 0) ? s : c;
  return a.compose(d);
}

}  // namespace

Taylor sin(const Taylor& a) { return trig(a, 0); }
Taylor cos(const Taylor& a) { return trig(a, 1); }
Taylor sinh(const Taylor& a) { return hyperbolic(a, 0); }
Taylor cosh(const Taylor& a) { return hyperbolic(a, 1); }

Taylor tanh(const Taylor& a) {
  // d^m/dy^m tanh y = P_m(tanh y) with P_{m+1}(T) = P_m'(T)(1 − T²).
  const int order = a.layout()->order();
  const double t = std::tanh(a.constant());
  std::vector<double> poly{0.0, 1.0};
  std::vector<double> d(static_cast<std::size_t>(order) + 1);
  for (int m = 0; m <= order; ++m) {
    double v = 0.0;
    for (std::size_t k = poly.size(); k-- > 0;) v = v * t + poly[k];
    d[static_cast<std::size_t>(m)] = v;
    std::vector<double> dp(poly.size() + 1, 0.0);
    for (std::size_t k = 1; k < poly.size(); ++k) {
      dp[k - 1] += k * poly[k];
      dp[k + 1] -= k * poly[k];
    }
    poly = std::move(dp);
  }
  return a.compose(d);
}

Taylor sqrt(const Taylor& a) { return pow(a, 0.5); }

Taylor pow(const Taylor& a, double p) {
  if (p == std::round(p) && std::abs(p) <= 64) return powi(a, static_cast<int>(p));
  return a.compose(power_derivs(a.constant(), p, a.layout()->order()));
}

Taylor pow(const Taylor& a, const Taylor& b) { return exp(b * log(a)); }

Taylor powi(const Taylor& a, int p) {
  if (p < 0) return reciprocal(powi(a, -p));
  Taylor result(a.layout(), 1.0);
  Taylor base = a;
  while (p > 0) {
    if (p & 1) result = result * base;
    p >>= 1;
    if (p) base = base * base;
  }
  return result;
}

}  // namespace dforge
