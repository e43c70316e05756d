#include "qlimits/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "qlimits/error.hpp"

namespace qlimits {

using cplx = std::complex<double>;

namespace {

enum class Op { constant, var_x, var_y, var_r, var_p, var_w, neg, add, sub, mul, div, pow, call };

enum class Fn { exp, log, sqrt, sin, cos, tan, sinh, cosh, tanh, abs, conj, real, imag, arg };

const std::unordered_map<std::string_view, Fn>& functions() {
  static const std::unordered_map<std::string_view, Fn> table{
      {"exp", Fn::exp},   {"log", Fn::log},   {"sqrt", Fn::sqrt},
      {"sin", Fn::sin},   {"cos", Fn::cos},   {"tan", Fn::tan},
      {"sinh", Fn::sinh}, {"cosh", Fn::cosh}, {"tanh", Fn::tanh},
      {"abs", Fn::abs},   {"conj", Fn::conj}, {"real", Fn::real},
      {"imag", Fn::imag}, {"arg", Fn::arg},
  };
  return table;
}

cplx apply(Fn fn, cplx v) {
  switch (fn) {
    case Fn::exp: return std::exp(v);
    case Fn::log: return std::log(v);
    case Fn::sqrt: return std::sqrt(v);
    case Fn::sin: return std::sin(v);
    case Fn::cos: return std::cos(v);
    case Fn::tan: return std::tan(v);
    case Fn::sinh: return std::sinh(v);
    case Fn::cosh: return std::cosh(v);
    case Fn::tanh: return std::tanh(v);
    case Fn::abs: return std::abs(v);
    case Fn::conj: return std::conj(v);
    case Fn::real: return v.real();
    case Fn::imag: return v.imag();
    case Fn::arg: return std::arg(v);
  }
  return {};
}

}  // namespace

struct Expression::Node {
  Op op = Op::constant;
  cplx value{};
  Fn fn = Fn::exp;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr leaf(Op op, cplx value = {}) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->value = value;
  return n;
}

NodePtr branch(Op op, NodePtr lhs, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

// Recursive descent over:
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | '+' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    auto root = expr();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected character");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw_invalid("invalid expression at position " + std::to_string(pos_) +
                  ": " + what);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = branch(Op::add, lhs, term());
      } else if (accept('-')) {
        lhs = branch(Op::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = branch(Op::mul, lhs, unary());
      } else if (accept('/')) {
        lhs = branch(Op::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return branch(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = atom();
    if (accept('^')) return branch(Op::pow, base, unary());
    return base;
  }

  NodePtr atom() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected character");
  }

  NodePtr number() {
    double v = 0.0;
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{}) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return leaf(Op::constant, v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "x") return leaf(Op::var_x);
    if (name == "y") return leaf(Op::var_y);
    if (name == "r") return leaf(Op::var_r);
    if (name == "p") return leaf(Op::var_p);
    if (name == "w") return leaf(Op::var_w);
    if (name == "i") return leaf(Op::constant, cplx{0.0, 1.0});
    if (name == "pi") return leaf(Op::constant, std::numbers::pi);
    const auto& table = functions();
    if (auto it = table.find(name); it != table.end()) {
      if (!accept('(')) fail("expected '(' after function name");
      auto arg = expr();
      if (!accept(')')) fail("expected ')'");
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::call;
      n->fn = it->second;
      n->lhs = std::move(arg);
      return n;
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

struct Env {
  double x, y, p, w;
};

cplx eval(const Expression::Node& n, const Env& env) {
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::var_x: return env.x;
    case Op::var_y: return env.y;
    case Op::var_r: return std::hypot(env.x, env.y);
    case Op::var_p: return env.p;
    case Op::var_w: return env.w;
    case Op::neg: return cplx(0.0) - eval(*n.lhs, env);  // keeps +0 imaginary parts for branch cuts
    case Op::add: return eval(*n.lhs, env) + eval(*n.rhs, env);
    case Op::sub: return eval(*n.lhs, env) - eval(*n.rhs, env);
    case Op::mul: return eval(*n.lhs, env) * eval(*n.rhs, env);
    case Op::div: return eval(*n.lhs, env) / eval(*n.rhs, env);
    case Op::pow: {
      const cplx base = eval(*n.lhs, env);
      const cplx ex = eval(*n.rhs, env);
      // Small integer exponents by repeated multiplication: exact for
      // negative real bases, where std::pow goes through log.
      if (ex.imag() == 0.0 && ex.real() == std::round(ex.real()) &&
          std::abs(ex.real()) <= 16.0) {
        const int k = static_cast<int>(ex.real());
        cplx acc{1.0, 0.0};
        for (int j = 0; j < std::abs(k); ++j) acc *= base;
        return k < 0 ? 1.0 / acc : acc;
      }
      return std::pow(base, ex);
    }
    case Op::call: return apply(n.fn, eval(*n.lhs, env));
  }
  return {};
}

}  // namespace

Expression Expression::compile(std::string_view source) {
  Parser parser(source);
  return Expression(std::string(source), parser.parse());
}

cplx Expression::evaluate(double x, double y, double p, double w) const {
  return eval(*root_, Env{x, y, p, w});
}

}  // namespace qlimits
