#pragma once

#include <complex>
#include <memory>
#include <string>
#include <string_view>

namespace qlimits {

/// A compiled complex-valued expression in the transverse coordinates and
/// the parameter, used to author custom image models from text.
///
/// Grammar: numbers, the variables x, y, r (= hypot(x, y)), p and w
/// (the model waist), the constants pi and i, the binary operators
/// + - * / ^, unary minus, parentheses, and the functions exp, log, sqrt,
/// sin, cos, tan, sinh, cosh, tanh, abs, conj, real, imag and arg.
///
///   auto e = Expression::compile("exp(-(x-p)^2/w^2) * exp(i*0.5*p*x)");
///   std::complex<double> v = e.evaluate(0.3, 0.0, 0.01, 1.0);
class Expression {
 public:
  /// Throws qlimits::Error(invalid_argument) with the offending position on
  /// a syntax error or an unknown identifier.
  static Expression compile(std::string_view source);

  std::complex<double> evaluate(double x, double y, double p, double w) const;
  const std::string& source() const noexcept { return source_; }

  struct Node;

 private:
  Expression(std::string source, std::shared_ptr<const Node> root)
      : source_(std::move(source)), root_(std::move(root)) {}

  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace qlimits
