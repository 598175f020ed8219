#include "dforge/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dforge/errors.hpp"

namespace dforge {

namespace {

std::vector<std::vector<double>> derivative_table(const StateFunction& u, int max_order) {
  std::vector<std::vector<double>> d;
  for (int o = 0; o <= max_order; ++o) {
    auto f = dealiased_derivative(u, o);
    d.emplace_back(f.values().begin(), f.values().end());
  }
  return d;
}

StateFunction field(const StateFunction& like, std::vector<double> v) {
  return StateFunction(like.grid(), std::move(v), like.time());
}

StateFunction dx(const StateFunction& f) { return derivative(f, 1); }

}  // namespace

StateFunction evaluate_expansion(const NonlinearitySpec& spec, const StateFunction& u,
                                 const std::vector<ExpansionTerm>& terms) {
  int max_partial = 0, max_order = 0;
  for (const auto& t : terms) {
    max_partial = std::max(max_partial, t.partial.order());
    for (int o : t.orders) max_order = std::max(max_order, o);
  }
  const auto args = argument_fields(u);
  const PartialTable table(spec, args, max_partial);
  const auto d = derivative_table(u, max_order);
  const std::size_t n = args.size();
  std::vector<double> out(n, 0.0);
  for (const auto& t : terms) {
    const auto p = table.field(t.partial);
    if (p.empty()) continue;
    for (std::size_t i = 0; i < n; ++i) {
      double v = static_cast<double>(t.coeff) * p[i];
      for (int o : t.orders) v *= d[static_cast<std::size_t>(o)][i];
      out[i] += v;
    }
  }
  return field(u, std::move(out));
}

StateFunction third_derivative_rhs(const NonlinearitySpec& spec, const StateFunction& u) {
  return evaluate_expansion(spec, u, tabulated_third_derivative_terms());
}

StateFunction LinearizedCoefficients::reconstruct(const StateFunction& u) const {
  std::vector<double> out(remainder.values().begin(), remainder.values().end());
  const StateFunction* a[4] = {&a0, &a1, &a2, &a3};
  for (int b = 0; b < 4; ++b) {
    const auto d = dealiased_derivative(u, n + b);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a[b]->values()[i] * d.values()[i];
  }
  return field(u, std::move(out));
}

LinearizedCoefficients explicit_coefficients(const NonlinearitySpec& spec, const StateFunction& u, int n,
                                             double epsilon) {
  if (n < 3) throw ArgumentError("coefficient order must lie in [3, 11]");
  const auto& terms = faa_di_bruno_terms(n, true);
  int max_partial = 0;
  for (const auto& t : terms) max_partial = std::max(max_partial, t.k);
  const auto args = argument_fields(u);
  const PartialTable table(spec, args, max_partial);
  const auto d = derivative_table(u, n + 3);
  const std::size_t size = args.size();

  std::vector<std::vector<double>> bucket(4, std::vector<double>(size, 0.0));
  std::vector<double> rem(size, 0.0);
  std::vector<Slot> slots;
  std::vector<int> orders;
  for (const auto& t : terms) {
    slots.clear();
    orders.clear();
    for (int l = 0; l < t.k; ++l) {
      slots.push_back(t.j[l] == -1 ? Slot::X : z_slot(t.j[l]));
      if (t.j[l] >= 0) orders.push_back(t.i[l] + t.j[l]);
    }
    const auto p = table.field(PartialKey(slots));
    if (p.empty()) continue;
    auto top = std::max_element(orders.begin(), orders.end());
    std::vector<double>* target = &rem;
    if (top != orders.end() && *top >= n) {
      target = &bucket[static_cast<std::size_t>(*top - n)];
      orders.erase(top);
    }
    const double c = static_cast<double>(t.multiplicity);
    for (std::size_t i = 0; i < size; ++i) {
      double v = c * p[i];
      for (int o : orders) v *= d[static_cast<std::size_t>(o)][i];
      (*target)[i] += v;
    }
  }
  return {n,
          field(u, std::move(bucket[3])),
          field(u, std::move(bucket[2])),
          field(u, std::move(bucket[1])),
          field(u, std::move(bucket[0])),
          field(u, std::move(rem)),
          epsilon};
}

LinearizedCoefficients linearized_coefficients(const NonlinearitySpec& spec, const StateFunction& u, int n,
                                               double epsilon) {
  if (n > 11) throw RegularityError("coefficient order exceeds the regularity budget of 11");
  if (n < 3) throw ArgumentError("coefficient order must lie in [3, 11]");
  const int base = n < 7 ? 3 : 7;
  auto c = explicit_coefficients(spec, u, base, epsilon);
  for (int m = base; m < n; ++m) {
    const auto dm = dealiased_derivative(u, m);
    c.remainder = dx(c.remainder) + dx(c.a0) * dm;
    c.a0 = c.a0 + dx(c.a1);
    c.a1 = c.a1 + dx(c.a2);
    c.a2 = c.a2 + dx(c.a3);
    c.n = m + 1;
  }
  const auto fz3 = partial_field(spec, PartialKey({Slot::Z3}), u);
  const auto fz2 = partial_field(spec, PartialKey({Slot::Z2}), u);
  c.a3 = fz3;
  c.a2 = fz2 + static_cast<double>(n) * dx(fz3);
  return c;
}

double reconstruction_error(const NonlinearitySpec& spec, const StateFunction& u,
                            const LinearizedCoefficients& c) {
  const auto ref = dealiased_derivative(evaluate_rhs(spec, u), c.n);
  const double scale = l2_norm(ref);
  const double err = l2_norm(dealias(c.reconstruct(u)) - ref);
  return scale > 0.0 ? err / scale : err;
}

RemainderReport remainder_norm_check(const NonlinearitySpec& spec, const StateFunction& profile, int n,
                                     const std::vector<double>& amplitudes, double max_growth) {
  if (n != 7 && n != 8 && n != 11) throw ArgumentError("remainder check supports n = 7, 8, 11");
  RemainderReport r;
  r.n = n;
  std::vector<double> lx, ly;
  bool finite = true;
  for (double a : amplitudes) {
    const auto u = a * profile;
    const auto c = linearized_coefficients(spec, u, n);
    RemainderRow row;
    row.amplitude = a;
    row.remainder_l2 = l2_norm(c.remainder);
    row.h7 = sobolev_norm(u, 7.0);
    row.majorant = n == 7 ? 1.0 : sobolev_norm(u, n);
    row.ratio = row.majorant > 0.0 ? row.remainder_l2 / row.majorant : 0.0;
    if (!std::isfinite(row.ratio)) finite = false;
    if (row.ratio > 0.0 && row.h7 > 0.0) {
      lx.push_back(std::log(row.h7));
      ly.push_back(std::log(row.ratio));
    }
    r.rows.push_back(row);
  }
  r.growth_exponent = 0.0;
  if (lx.size() >= 2) {
    const double m = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i]; sy += ly[i]; sxx += lx[i] * lx[i]; sxy += lx[i] * ly[i];
    }
    r.growth_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  r.bounded = finite && r.growth_exponent <= max_growth;
  return r;
}

}  // namespace dforge
