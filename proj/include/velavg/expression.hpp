#pragma once

#include <memory>
#include <string>

namespace velavg {

/// Variables an expression may reference.
struct ExpressionVars {
  double lambda = 0.0;
  double t = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  double s = 0.0;  // fast variable of oscillating families
};

/// Compiled arithmetic expression in lambda, t, x (alias x1), y (alias x2) and s.
///
/// Grammar: + - * / ^, unary minus, parentheses, numbers, the constant pi and
/// the functions abs, sqrt, exp, log, sin, cos, tanh, sign, min(a,b), max(a,b).
/// `l` is accepted as shorthand for lambda.
class Expression {
 public:
  struct Node;

  explicit Expression(const std::string& text);
  double operator()(const ExpressionVars& vars) const;
  double operator()(double lambda) const {
    ExpressionVars vars;
    vars.lambda = lambda;
    return (*this)(vars);
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace velavg
