#include <doctest.h>

#include <cmath>
#include <numbers>

#include "plinf/expr.hpp"

using namespace plinf;

namespace {

double eval(const std::string& text, std::initializer_list<double> x) {
  Point p(static_cast<Index>(x.size()));
  Index k = 0;
  for (double v : x) p[k++] = v;
  return BoundaryExpr::parse(text, p.size())(p);
}

}  // namespace

TEST_CASE("basic evaluation") {
  CHECK(eval("abs(x1)", {-2, 5}) == 2);
  CHECK(eval("x1^2 + x2^2", {3, 4}) == 25);
  CHECK(eval("min(x1, max(x2, 0))", {5, -1}) == 0);
  CHECK(eval("pow(x2, 0.5) * pi", {0, 4}) == doctest::Approx(2 * std::numbers::pi));
  CHECK(eval("1.5e-1 * 2", {0}) == doctest::Approx(0.3));
}

TEST_CASE("precedence and associativity") {
  CHECK(eval("-x1^2", {3}) == -9);
  CHECK(eval("2^-1", {0}) == 0.5);
  CHECK(eval("2^3^2", {0}) == 512);
  CHECK(eval("1 - 2 - 3", {0}) == -4);
  CHECK(eval("8 / 4 / 2", {0}) == 1);
  CHECK(eval("2 + 3 * 4", {0}) == 14);
  CHECK(eval("(2 + 3) * 4", {0}) == 20);
  CHECK(eval("--x1", {2}) == 2);
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(BoundaryExpr::parse("", 2), ParseError);
  try {
    BoundaryExpr::parse("x1 + * x2", 2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 6);
  }
  try {
    BoundaryExpr::parse("x1 +\n  x3", 2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
  }
  CHECK_THROWS_AS(BoundaryExpr::parse("sin(x1)", 1), ParseError);
  CHECK_THROWS_AS(BoundaryExpr::parse("min(x1)", 1), ParseError);
  CHECK_THROWS_AS(BoundaryExpr::parse("(x1", 1), ParseError);
  CHECK_THROWS_AS(BoundaryExpr::parse("x1 x1", 1), ParseError);
}

TEST_CASE("evaluation domain errors") {
  const BoundaryExpr inv = BoundaryExpr::parse("1 / x1", 1);
  CHECK_THROWS_AS(inv(Point::Zero(1)), std::domain_error);
  const BoundaryExpr neg = BoundaryExpr::parse("x1 ^ -1", 1);
  CHECK_THROWS_AS(neg(Point::Zero(1)), std::domain_error);
  CHECK_THROWS_AS(inv.check_total(Box::cube(1, -1.0, 1.0)), std::domain_error);
  CHECK_NOTHROW(BoundaryExpr::parse("1 / (x1^2 + 1)", 1).check_total(Box::cube(1, -1.0, 1.0)));
}

TEST_CASE("text and dimension are kept") {
  const BoundaryExpr e = BoundaryExpr::parse("x1 + x2 + x3", 3);
  CHECK(e.text() == "x1 + x2 + x3");
  CHECK(e.dim() == 3);
}
