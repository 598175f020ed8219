#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace dforge {

/// Monomial tables for truncated Taylor polynomials in `nvars` variables up to total degree `order`.
class TaylorLayout {
 public:
  struct Triple {
    std::uint32_t a, b, c;
  };

  static std::shared_ptr<const TaylorLayout> get(int nvars, int order);

  TaylorLayout(int nvars, int order);

  int nvars() const noexcept { return nvars_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return degree_.size(); }
  std::span<const std::uint8_t> exponents(std::size_t m) const {
    return {exponents_.data() + m * static_cast<std::size_t>(nvars_), static_cast<std::size_t>(nvars_)};
  }
  int degree(std::size_t m) const { return degree_[m]; }
  /// α! for monomial m, converting Taylor coefficients to partial derivatives.
  double factorial(std::size_t m) const { return factorial_[m]; }
  /// Index of the monomial with the given exponents, or -1 if above the order.
  long index_of(std::span<const int> exps) const;
  std::span<const Triple> products() const noexcept { return products_; }

 private:
  int nvars_;
  int order_;
  std::vector<std::uint8_t> exponents_;
  std::vector<int> degree_;
  std::vector<double> factorial_;
  std::vector<Triple> products_;
  std::vector<long> lookup_;
};

/// Truncated multivariate Taylor polynomial with coefficients c_α = ∂^α f / α!.
class Taylor {
 public:
  Taylor(std::shared_ptr<const TaylorLayout> layout, double constant);
  static Taylor variable(std::shared_ptr<const TaylorLayout> layout, int var, double value);

  const std::shared_ptr<const TaylorLayout>& layout() const noexcept { return layout_; }
  double constant() const noexcept { return c_[0]; }
  std::span<const double> coefficients() const noexcept { return c_; }
  double& operator[](std::size_t m) { return c_[m]; }
  double operator[](std::size_t m) const { return c_[m]; }
  /// ∂^α f at the expansion point.
  double partial(std::span<const int> exps) const;

  Taylor& operator+=(const Taylor& o);
  Taylor& operator-=(const Taylor& o);
  Taylor& operator*=(double s);
  Taylor& operator+=(double s) { c_[0] += s; return *this; }

  /// Σ_m g^{(m)}(c)/m! (self − c)^m for the supplied derivative values of g at c.
  Taylor compose(std::span<const double> derivs) const;

  friend Taylor operator*(const Taylor& a, const Taylor& b);

 private:
  std::shared_ptr<const TaylorLayout> layout_;
  std::vector<double> c_;
};

inline Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
inline Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
inline Taylor operator+(Taylor a, double s) { return a += s; }
inline Taylor operator+(double s, Taylor a) { return a += s; }
inline Taylor operator-(Taylor a, double s) { return a += -s; }
inline Taylor operator-(double s, Taylor a) { a *= -1.0; return a += s; }
inline Taylor operator*(Taylor a, double s) { return a *= s; }
inline Taylor operator*(double s, Taylor a) { return a *= s; }
inline Taylor operator-(Taylor a) { return a *= -1.0; }
Taylor operator/(const Taylor& a, const Taylor& b);
Taylor operator/(double s, const Taylor& b);
inline Taylor operator/(Taylor a, double s) { return a *= 1.0 / s; }

Taylor reciprocal(const Taylor& a);
Taylor exp(const Taylor& a);
Taylor log(const Taylor& a);
Taylor sin(const Taylor& a);
Taylor cos(const Taylor& a);
Taylor sqrt(const Taylor& a);
Taylor cosh(const Taylor& a);
Taylor sinh(const Taylor& a);
Taylor tanh(const Taylor& a);
Taylor pow(const Taylor& a, double p);
Taylor pow(const Taylor& a, const Taylor& b);
Taylor powi(const Taylor& a, int p);

}  // namespace dforge
