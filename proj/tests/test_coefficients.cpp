#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "dforge/coefficients.hpp"
#include "dforge/errors.hpp"
#include "support.hpp"

using namespace dforge;
using namespace dforge::testing;

namespace {

using Factor = std::pair<int, int>;

long long factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

// Every multiset of factors ∂x^i z_j with Σ i = n, listed in descending order.
std::vector<std::vector<Factor>> factor_multisets(int n, bool prune) {
  std::vector<Factor> kinds;
  for (int i = n; i >= 1; --i)
    for (int j = 3; j >= -1; --j)
      if (!(prune && j == -1 && i >= 2)) kinds.push_back({i, j});
  std::vector<std::vector<Factor>> out;
  std::vector<Factor> cur;
  std::function<void(std::size_t, int)> rec = [&](std::size_t from, int left) {
    if (left == 0) {
      out.push_back(cur);
      return;
    }
    for (std::size_t q = from; q < kinds.size(); ++q) {
      if (kinds[q].first > left) continue;
      cur.push_back(kinds[q]);
      rec(q, left - kinds[q].first);
      cur.pop_back();
    }
  };
  rec(0, n);
  return out;
}

// Number of ways to split n labelled derivatives into the given blocks.
long long multiplicity_oracle(const std::vector<Factor>& fs, int n) {
  long long denom = 1;
  std::map<Factor, int> reps;
  for (const auto& f : fs) {
    denom *= factorial(f.first);
    ++reps[f];
  }
  for (const auto& [f, m] : reps) denom *= factorial(m);
  return factorial(n) / denom;
}

long long stirling2(int n, int k) {
  if (n == k) return 1;
  if (k == 0 || k > n) return 0;
  return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1);
}

std::vector<Factor> factors_of(const IndexTuple& t) {
  std::vector<Factor> fs;
  for (int l = 0; l < t.k; ++l) fs.push_back({t.i[l], t.j[l]});
  return fs;
}

StateFunction bump(const SpectralGrid& g, double c) {
  return StateFunction::sample(g, [&](double x) { return c + 0.3 * std::sin(x) + 0.1 * std::cos(2 * x); });
}

}  // namespace

TEST_CASE("term table matches the multiset oracle") {
  for (int n = 1; n <= 8; ++n)
    for (bool prune : {true, false}) {
      const auto& terms = faa_di_bruno_terms(n, prune);
      auto expected = factor_multisets(n, prune);
      std::map<std::vector<Factor>, long long> got;
      for (const auto& t : terms) {
        CHECK(std::is_sorted(t.i.rbegin(), t.i.rend()));
        got[factors_of(t)] = t.multiplicity;
      }
      REQUIRE(got.size() == expected.size());
      for (const auto& fs : expected) {
        REQUIRE(got.count(fs) == 1);
        CHECK(got[fs] == multiplicity_oracle(fs, n));
      }
    }
}

TEST_CASE("term counts") {
  CHECK(faa_di_bruno_terms(1).size() == 5);
  CHECK(faa_di_bruno_terms(2).size() == 19);
  CHECK(faa_di_bruno_terms(3).size() == 59);
  CHECK(faa_di_bruno_terms(4).size() == 164);
}

TEST_CASE("unpruned multiplicities sum to the labelled partition count") {
  for (int n = 1; n <= 9; ++n) {
    long long total = 0, touchard = 0, pow5 = 1;
    for (const auto& t : faa_di_bruno_terms(n, false)) total += t.multiplicity;
    for (int k = 1; k <= n; ++k) {
      pow5 *= 5;
      touchard += stirling2(n, k) * pow5;
    }
    CHECK(total == touchard);
  }
}

TEST_CASE("tabulated expansion agrees with the generated table") {
  auto gen = expansion_terms(3);
  auto app = tabulated_third_derivative_terms();
  CHECK(app.size() == 59);
  std::sort(gen.begin(), gen.end());
  std::sort(app.begin(), app.end());
  CHECK(std::adjacent_find(app.begin(), app.end()) == app.end());
  CHECK(gen == app);
}

TEST_CASE("enumerate_indices") {
  for (int n = 1; n <= 6; ++n)
    for (int k = 1; k <= n; ++k)
      for (const auto& t : enumerate_indices(n, k)) {
        CHECK(t.k == k);
        int sum = 0;
        for (int l = 0; l < k; ++l) {
          sum += t.i[l];
          CHECK(t.i[l] >= 1);
          CHECK(t.j[l] >= -1);
          CHECK(t.j[l] <= 3);
          if (t.j[l] == -1) CHECK(t.i[l] == 1);
        }
        CHECK(sum == n);
      }
  for (const auto& t : enumerate_indices(3, 1)) CHECK(t.multiplicity == 1);
  for (const auto& t : enumerate_indices(3, 2)) CHECK(t.multiplicity == 3);
  CHECK(enumerate_indices(3, 1).size() == 4);
  for (const auto& t : enumerate_indices(7, 2, IndexMode::remainder))
    for (int l = 0; l < t.k; ++l) CHECK(t.i[l] + t.j[l] < 7);
  CHECK_THROWS_AS(enumerate_indices(12, 2), RegularityError);
  CHECK_THROWS_AS(faa_di_bruno_terms(12), RegularityError);
  CHECK_THROWS_AS(enumerate_indices(4, 0), ArgumentError);
}

TEST_CASE("third derivative examples") {
  const SpectralGrid g(2 * kPi, 16);
  auto s = StateFunction::sample(g, [](double x) { return std::sin(x); });
  CHECK(max_diff(third_derivative_rhs(NonlinearitySpec("lin", "z3"), s), -1.0 * s) < 1e-11);
  auto sq = third_derivative_rhs(NonlinearitySpec("sq", "z0^2"), s);
  CHECK(max_diff(sq, StateFunction::sample(g, [](double x) { return -4 * std::sin(2 * x); })) < 1e-11);

  const auto& kdv = PresetCatalogue::builtin().get("kdv");
  const SpectralGrid gk(32 * kPi, 512);
  auto sol = StateFunction::sample(gk, [](double x) {
    const double c = 1.0 / std::cosh(0.5 * (x - 16 * kPi));
    return 0.5 * c * c;
  });
  auto ref = derivative(evaluate_rhs(kdv.spec, sol), 3);
  CHECK(max_diff(third_derivative_rhs(kdv.spec, sol), ref) < 1e-7);
}

TEST_CASE("linearized coefficient examples") {
  const SpectralGrid g(2 * kPi, 64);
  auto u = bump(g, 2.0);
  auto lin = linearized_coefficients(NonlinearitySpec("lin", "z3"), u, 7);
  CHECK(max_diff(lin.a3, StateFunction::constant(g, 1.0)) == 0.0);
  CHECK(lin.a2.max_abs() < 1e-14);
  CHECK(lin.a1.max_abs() < 1e-14);
  CHECK(lin.a0.max_abs() < 1e-14);
  CHECK(lin.remainder.max_abs() < 1e-12);

  const auto& kdv = PresetCatalogue::builtin().get("kdv").spec;
  auto c = linearized_coefficients(kdv, u, 7);
  CHECK(max_diff(c.a3, StateFunction::constant(g, -1.0)) < 1e-14);
  CHECK(c.a2.max_abs() < 1e-12);
  CHECK(max_diff(c.a1, -6.0 * u) < 1e-10);
  CHECK(max_diff(c.a0, -48.0 * derivative(u, 1)) < 1e-9);

  const auto& k22 = PresetCatalogue::builtin().get("k22").spec;
  auto ck = linearized_coefficients(k22, u, 7);
  CHECK(max_diff(ck.a3, -2.0 * u) < 1e-12);
  CHECK(max_diff(ck.a2, -20.0 * derivative(u, 1)) < 1e-10);
  CHECK_THROWS_AS(linearized_coefficients(k22, u, 12), RegularityError);
  CHECK_THROWS_AS(linearized_coefficients(k22, u, 2), ArgumentError);
}

TEST_CASE("a2 / a3 splits into the gauge derivative and g_M") {
  for (const char* name : {"k22", "harry_dym", "linear_gauged"}) {
    const auto& p = PresetCatalogue::builtin().get(name);
    auto u = p.initial_data(p.default_grid());
    auto gm = modified_diffusion_ratio(p.spec, u);
    auto a3 = partial_field(p.spec, PartialKey({Slot::Z3}), u);
    for (int n : {3, 7, 11}) {
      auto c = linearized_coefficients(p.spec, u, n);
      std::vector<double> r(static_cast<std::size_t>(u.size()));
      auto dlog = derivative(a3, 1);
      for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = c.a2.values()[i] / c.a3.values()[i] - n * dlog.values()[i] / a3.values()[i] - gm.values()[i];
      CHECK(StateFunction(u.grid(), r).max_abs() < 1e-9);
    }
  }
}

TEST_CASE("reconstruction on band-limited states") {
  const SpectralGrid g(2 * kPi, 64);
  for (const char* name : {"kdv", "k22", "harry_dym", "pilod_illposed", "linear_gauged"}) {
    const auto& spec = PresetCatalogue::builtin().get(name).spec;
    for (unsigned seed = 1; seed <= 3; ++seed) {
      auto u = band_limited(g, 6, seed, 0.2) + StateFunction::constant(g, 2.0);
      for (int n : {3, 5, 7, 9, 11}) {
        auto c = linearized_coefficients(spec, u, n);
        CHECK(c.n == n);
        CHECK(reconstruction_error(spec, u, c) < 1e-9);
      }
      auto e = explicit_coefficients(spec, u, 5);
      CHECK(reconstruction_error(spec, u, e) < 1e-9);
    }
  }
}

TEST_CASE("zero state") {
  const SpectralGrid g(2 * kPi, 32);
  auto zero = StateFunction::constant(g, 0.0);
  const auto& kdv = PresetCatalogue::builtin().get("kdv").spec;
  auto c = linearized_coefficients(kdv, zero, 7);
  CHECK(c.remainder.max_abs() == 0.0);
  CHECK(c.a1.max_abs() == 0.0);
  CHECK(reconstruction_error(kdv, zero, c) == 0.0);
}

TEST_CASE("remainder norms") {
  const SpectralGrid g(2 * kPi, 64);
  auto profile = StateFunction::sample(g, [](double x) { return std::sin(x) + 0.2 * std::cos(3 * x); });
  const auto& kdv = PresetCatalogue::builtin().get("kdv").spec;
  auto r = remainder_norm_check(kdv, profile, 7, {0.01, 0.1, 1.0});
  CHECK(r.rows.size() == 3);
  CHECK(r.bounded);
  // quadratic remainder over a constant majorant
  CHECK(r.growth_exponent == doctest::Approx(2.0).epsilon(1e-6));
  for (const auto& row : r.rows) CHECK(row.majorant == 1.0);
  auto r11 = remainder_norm_check(kdv, profile, 11, {0.01, 0.1, 1.0});
  CHECK(r11.bounded);
  CHECK(r11.growth_exponent == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(remainder_norm_check(kdv, profile, 5, {1.0}), ArgumentError);
}

TEST_CASE("terms json") {
  std::ostringstream os;
  write_terms_json(os, faa_di_bruno_terms(3));
  auto j = nlohmann::json::parse(os.str());
  REQUIRE(j.size() == 59);
  long long sum = 0;
  for (const auto& t : j) {
    CHECK(t.contains("partials"));
    CHECK(t["orders"].size() == t["partials"].size());
    sum += t["coeff"].get<long long>();
  }
  long long expect = 0;
  for (const auto& t : faa_di_bruno_terms(3)) expect += t.multiplicity;
  CHECK(sum == expect);
}
