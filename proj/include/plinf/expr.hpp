#ifndef PLINF_EXPR_HPP_
#define PLINF_EXPR_HPP_

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "plinf/grid.hpp"

namespace plinf {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Arithmetic expression over x1..xd with + - * / ^, unary minus, the
/// constant pi and the functions abs, min, max, pow.
///
/// Precedence from loosest to tightest: + -, * /, unary minus, ^ (right
/// associative), so -x1^2 is -(x1^2) and 2^-1 is 0.5.
class BoundaryExpr {
 public:
  /// Throws ParseError with the 1-based line and column of the offending token.
  static BoundaryExpr parse(const std::string& text, Index dim);

  /// Throws std::domain_error on division by zero, 0 raised to a negative
  /// power or any other non-finite intermediate.
  double operator()(const Point& x) const;

  /// Evaluates on an n^d lattice of probe points spanning `box` and
  /// throws std::domain_error naming the first point where the value is
  /// not defined.
  void check_total(const Box& box, int per_axis = 9) const;

  const std::string& text() const { return text_; }
  Index dim() const { return dim_; }

  struct Node;

 private:
  std::string text_;
  Index dim_ = 0;
  std::shared_ptr<const Node> root_;
};

}  // namespace plinf

#endif  // PLINF_EXPR_HPP_
