#include "dforge/expression.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <numbers>
#include <unordered_map>

namespace dforge {

namespace {

using Code = std::vector<Expression::Instr>;
using Op = Expression::Op;

const std::unordered_map<std::string, Op>& functions() {
  static const std::unordered_map<std::string, Op> table{
      {"exp", Op::Exp},   {"ln", Op::Log},     {"log", Op::Log},   {"sin", Op::Sin},
      {"cos", Op::Cos},   {"sqrt", Op::Sqrt},  {"sinh", Op::Sinh}, {"cosh", Op::Cosh},
      {"tanh", Op::Tanh}, {"sech", Op::Sech}};
  return table;
}

bool is_constant(const Code& c) { return c.size() == 1 && c[0].op == Op::Const; }

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  Code run() {
    Code c = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
    return c;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char ch) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  Code expr() {
    Code c = term();
    for (;;) {
      if (accept('+')) append(c, term(), Op::Add);
      else if (accept('-')) append(c, term(), Op::Sub);
      else return c;
    }
  }

  Code term() {
    Code c = unary();
    for (;;) {
      if (accept('*')) append(c, unary(), Op::Mul);
      else if (accept('/')) append(c, unary(), Op::Div);
      else return c;
    }
  }

  Code unary() {
    if (accept('-')) {
      Code c = unary();
      if (is_constant(c)) c[0].value = -c[0].value;
      else c.push_back({Op::Neg});
      return c;
    }
    if (accept('+')) return unary();
    return power();
  }

  Code power() {
    Code base = primary();
    if (!accept('^')) return base;
    Code exponent = unary();
    if (is_constant(exponent)) {
      const double p = exponent[0].value;
      if (p == std::round(p) && std::abs(p) <= 64) base.push_back({Op::PowInt, static_cast<int>(p)});
      else base.push_back({Op::PowReal, 0, p});
      return base;
    }
    append(base, std::move(exponent), Op::Pow);
    return base;
  }

  Code primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of expression", pos_);
    const char ch = s_[pos_];
    if (ch == '(') {
      ++pos_;
      Code c = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return c;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) throw ParseError("malformed number", pos_);
      pos_ += static_cast<std::size_t>(end - begin);
      return {{Op::Const, 0, v}};
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (auto it = functions().find(name); it != functions().end()) {
        if (!accept('(')) throw ParseError("expected '(' after " + name, pos_);
        Code c = expr();
        if (!accept(')')) throw ParseError("expected ')'", pos_);
        c.push_back({it->second});
        return c;
      }
      if (auto it = std::find(vars_.begin(), vars_.end(), name); it != vars_.end())
        return {{Op::Var, static_cast<int>(it - vars_.begin())}};
      if (name == "pi") return {{Op::Const, 0, std::numbers::pi}};
      throw ParseError("unknown identifier '" + name + "'", start);
    }
    throw ParseError("unexpected character '" + std::string(1, ch) + "'", pos_);
  }

  static void append(Code& lhs, Code rhs, Op op) {
    lhs.insert(lhs.end(), rhs.begin(), rhs.end());
    lhs.push_back({op});
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables) {
  Expression e;
  e.source_ = text;
  e.nvars_ = variables.size();
  e.code_ = Parser(text, variables).run();
  int depth = 0, max_depth = 0;
  for (const auto& ins : e.code_) {
    if (ins.op == Op::Const || ins.op == Op::Var) ++depth;
    else if (ins.op == Op::Add || ins.op == Op::Sub || ins.op == Op::Mul || ins.op == Op::Div ||
             ins.op == Op::Pow)
      --depth;
    max_depth = std::max(max_depth, depth);
  }
  if (max_depth > 64) throw ParseError("expression nests too deeply", 0);
  return e;
}

Expression Expression::constant(double c, std::size_t nvars) {
  Expression e;
  e.source_ = std::to_string(c);
  e.nvars_ = nvars;
  e.code_ = {{Op::Const, 0, c}};
  return e;
}

bool Expression::uses(int var) const {
  return std::any_of(code_.begin(), code_.end(),
                     [var](const Instr& i) { return i.op == Op::Var && i.index == var; });
}

double Expression::operator()(std::span<const double> vars) const {
  std::array<double, 64> stack;
  std::size_t top = 0;
  for (const auto& ins : code_) {
    switch (ins.op) {
      case Op::Const: stack[top++] = ins.value; break;
      case Op::Var: stack[top++] = vars[static_cast<std::size_t>(ins.index)]; break;
      case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::Add: --top; stack[top - 1] += stack[top]; break;
      case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
      case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
      case Op::Div: --top; stack[top - 1] /= stack[top]; break;
      case Op::Pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
      case Op::PowReal: stack[top - 1] = std::pow(stack[top - 1], ins.value); break;
      case Op::PowInt: {
        double base = stack[top - 1], r = 1.0;
        int p = ins.index < 0 ? -ins.index : ins.index;
        while (p > 0) {
          if (p & 1) r *= base;
          p >>= 1;
          base *= base;
        }
        stack[top - 1] = ins.index < 0 ? 1.0 / r : r;
        break;
      }
      case Op::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
      case Op::Log: stack[top - 1] = std::log(stack[top - 1]); break;
      case Op::Sin: stack[top - 1] = std::sin(stack[top - 1]); break;
      case Op::Cos: stack[top - 1] = std::cos(stack[top - 1]); break;
      case Op::Sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
      case Op::Sinh: stack[top - 1] = std::sinh(stack[top - 1]); break;
      case Op::Cosh: stack[top - 1] = std::cosh(stack[top - 1]); break;
      case Op::Tanh: stack[top - 1] = std::tanh(stack[top - 1]); break;
      case Op::Sech: stack[top - 1] = 1.0 / std::cosh(stack[top - 1]); break;
    }
  }
  return stack[0];
}

}  // namespace dforge
