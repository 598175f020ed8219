#include <doctest.h>

#include <cmath>

#include "dforge/taylor.hpp"

using namespace dforge;

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void check_close(const Taylor& a, const Taylor& b, double tol) {
  REQUIRE(a.coefficients().size() == b.coefficients().size());
  for (std::size_t m = 0; m < a.coefficients().size(); ++m)
    CHECK(std::abs(a[m] - b[m]) <= tol * std::max(1.0, std::abs(b[m])));
}

}  // namespace

TEST_CASE("layout size and lookup") {
  for (int v = 1; v <= 5; ++v)
    for (int k = 0; k <= 6; ++k) {
      auto L = TaylorLayout::get(v, k);
      CHECK(L->size() == static_cast<std::size_t>(binomial(v + k, k)));
      CHECK(L == TaylorLayout::get(v, k));
      for (std::size_t m = 0; m < L->size(); ++m) {
        std::vector<int> e(L->exponents(m).begin(), L->exponents(m).end());
        CHECK(L->index_of(e) == static_cast<long>(m));
      }
    }
  auto L = TaylorLayout::get(2, 3);
  std::vector<int> over{2, 2};
  CHECK(L->index_of(over) == -1);
}

TEST_CASE("partials of a product of elementary functions") {
  // g(x, y) = exp(x y) + sin(x) y^2 at (0.3, -0.7)
  auto L = TaylorLayout::get(2, 4);
  const double x0 = 0.3, y0 = -0.7;
  auto x = Taylor::variable(L, 0, x0);
  auto y = Taylor::variable(L, 1, y0);
  auto g = exp(x * y) + sin(x) * y * y;
  const double e = std::exp(x0 * y0);
  auto p = [&](int a, int b) {
    std::vector<int> ex{a, b};
    return g.partial(ex);
  };
  CHECK(p(0, 0) == doctest::Approx(e + std::sin(x0) * y0 * y0).epsilon(1e-14));
  CHECK(p(1, 0) == doctest::Approx(y0 * e + std::cos(x0) * y0 * y0).epsilon(1e-14));
  CHECK(p(0, 1) == doctest::Approx(x0 * e + 2 * std::sin(x0) * y0).epsilon(1e-14));
  CHECK(p(1, 1) == doctest::Approx(e + x0 * y0 * e + 2 * std::cos(x0) * y0).epsilon(1e-14));
  CHECK(p(2, 0) == doctest::Approx(y0 * y0 * e - std::sin(x0) * y0 * y0).epsilon(1e-14));
  CHECK(p(0, 3) == doctest::Approx(x0 * x0 * x0 * e).epsilon(1e-13));
  CHECK(p(2, 2) == doctest::Approx((2 + 4 * x0 * y0 + x0 * x0 * y0 * y0) * e - 2 * std::sin(x0)).epsilon(1e-13));
}

TEST_CASE("algebraic identities") {
  auto L = TaylorLayout::get(3, 5);
  auto a = Taylor::variable(L, 0, 1.3) + 0.2 * Taylor::variable(L, 1, 0.4) * Taylor::variable(L, 2, -0.5);
  auto b = 2.0 + Taylor::variable(L, 2, -0.5) * Taylor::variable(L, 0, 1.3);
  check_close(exp(log(a)), a, 1e-12);
  check_close(sin(a) * sin(a) + cos(a) * cos(a), Taylor(L, 1.0), 1e-12);
  check_close((a / b) * b, a, 1e-12);
  check_close(sqrt(a) * sqrt(a), a, 1e-12);
  check_close(powi(a, 4), a * a * a * a, 1e-12);
  check_close(powi(a, -2) * a * a, Taylor(L, 1.0), 1e-12);
  check_close(pow(a, 0.5), sqrt(a), 1e-12);
  check_close(cosh(a) * cosh(a) - sinh(a) * sinh(a), Taylor(L, 1.0), 1e-11);
  check_close(tanh(a), sinh(a) / cosh(a), 1e-12);
  check_close(pow(a, b), exp(b * log(a)), 1e-12);
  check_close(reciprocal(b) * b, Taylor(L, 1.0), 1e-12);
}
