#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dforge/errors.hpp"
#include "dforge/taylor.hpp"

namespace dforge {

class ParseError : public ConfigurationError {
 public:
  ParseError(const std::string& what, std::size_t position)
      : ConfigurationError(what + " (at column " + std::to_string(position + 1) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Compiled arithmetic expression over a fixed list of named variables.
///
/// Grammar: + - * / ^ (right associative), unary minus, parentheses, numeric
/// literals, the constant `pi`, and the functions exp, ln (alias log), sin, cos,
/// sqrt, sinh, cosh, tanh, sech. Evaluation is templated so the same program runs
/// on doubles and on Taylor polynomials.
class Expression {
 public:
  enum class Op : std::uint8_t {
    Const, Var, Add, Sub, Mul, Div, Neg, PowInt, PowReal, Pow,
    Exp, Log, Sin, Cos, Sqrt, Sinh, Cosh, Tanh, Sech
  };
  struct Instr {
    Op op;
    int index = 0;
    double value = 0.0;
  };

  Expression() = default;
  static Expression parse(const std::string& text, const std::vector<std::string>& variables);
  static Expression constant(double c, std::size_t nvars);

  const std::string& source() const noexcept { return source_; }
  std::size_t arity() const noexcept { return nvars_; }
  bool uses(int var) const;
  bool empty() const noexcept { return code_.empty(); }

  double operator()(std::span<const double> vars) const;

  template <class T>
  T evaluate(std::span<const T> vars) const;

 private:
  std::string source_;
  std::size_t nvars_ = 0;
  std::vector<Instr> code_;
};

template <class T>
T Expression::evaluate(std::span<const T> vars) const {
  using std::cos;
  using std::cosh;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sinh;
  using std::sqrt;
  using std::tanh;
  auto lift = [&](double c) -> T {
    if constexpr (std::is_same_v<T, double>) {
      return c;
    } else {
      return T(vars[0].layout(), c);
    }
  };
  std::vector<T> stack;
  stack.reserve(16);
  for (const auto& ins : code_) {
    switch (ins.op) {
      case Op::Const: stack.push_back(lift(ins.value)); break;
      case Op::Var: stack.push_back(vars[static_cast<std::size_t>(ins.index)]); break;
      case Op::Neg: stack.back() = -stack.back(); break;
      case Op::Exp: stack.back() = exp(stack.back()); break;
      case Op::Log: stack.back() = log(stack.back()); break;
      case Op::Sin: stack.back() = sin(stack.back()); break;
      case Op::Cos: stack.back() = cos(stack.back()); break;
      case Op::Sqrt: stack.back() = sqrt(stack.back()); break;
      case Op::Sinh: stack.back() = sinh(stack.back()); break;
      case Op::Cosh: stack.back() = cosh(stack.back()); break;
      case Op::Tanh: stack.back() = tanh(stack.back()); break;
      case Op::Sech: stack.back() = 1.0 / cosh(stack.back()); break;
      case Op::PowInt: {
        if constexpr (std::is_same_v<T, double>) {
          double base = stack.back(), r = 1.0;
          int p = ins.index;
          const bool neg = p < 0;
          if (neg) p = -p;
          while (p > 0) {
            if (p & 1) r *= base;
            p >>= 1;
            base *= base;
          }
          stack.back() = neg ? 1.0 / r : r;
        } else {
          stack.back() = powi(stack.back(), ins.index);
        }
        break;
      }
      case Op::PowReal: {
        using std::pow;
        stack.back() = pow(stack.back(), ins.value);
        break;
      }
      default: {
        T rhs = std::move(stack.back());
        stack.pop_back();
        T& lhs = stack.back();
        switch (ins.op) {
          case Op::Add: lhs = lhs + rhs; break;
          case Op::Sub: lhs = lhs - rhs; break;
          case Op::Mul: lhs = lhs * rhs; break;
          case Op::Div: lhs = lhs / rhs; break;
          case Op::Pow: {
            using std::pow;
            lhs = pow(lhs, rhs);
            break;
          }
          default: break;
        }
      }
    }
  }
  return stack.back();
}

}  // namespace dforge
