#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "invar/expression.hpp"

using namespace invar;

namespace {
double ev(const char* src, int dim, double t, std::vector<double> x) {
  return eval(parse_expression(src, dim), t, x);
}
}  // namespace

TEST_CASE("unit disk expression") {
  Expression e = parse_expression("x1*x1 + x2*x2 - 1", 2);
  std::vector<double> x{0.6, 0.8};
  CHECK(eval(e, 0.0, x) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(depends_on_state(e));
  CHECK_FALSE(depends_on_time(e));
  CHECK(max_state_index(e) == 2);
}

TEST_CASE("unary minus node") {
  Expression e = parse_expression("-x1", 1);
  CHECK(e.kind == ExprKind::negate);
  CHECK(e.args[0].kind == ExprKind::state_var);
  CHECK(e.args[0].var_index == 1);
  std::vector<double> x{3.5};
  CHECK(eval(e, 0.0, x) == -3.5);
}

TEST_CASE("unbalanced parenthesis reports offset 11") {
  try {
    parse_expression("max(x1, x2", 2);
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    CHECK(err.position == 11);
  }
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_expression("", 1), ParseError);
  CHECK_THROWS_AS(parse_expression("x1 +", 1), ParseError);
  CHECK_THROWS_AS(parse_expression("foo(1)", 1), ParseError);
  CHECK_THROWS_AS(parse_expression("x2", 1), ParseError);   // exceeds dimension
  CHECK_THROWS_AS(parse_expression("sin()", 1), ParseError);
  CHECK_THROWS_AS(parse_expression("sin(1, 2)", 1), ParseError);
  CHECK_THROWS_AS(parse_expression("min(1)", 1), ParseError);
  CHECK_THROWS_AS(parse_expression("1 2", 1), ParseError);
  CHECK_THROWS_AS(parse_expression("(x1", 1), ParseError);
  try {
    parse_expression("x1 + @", 1);
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    CHECK(err.position == 6);
  }
}

TEST_CASE("precedence and associativity") {
  CHECK(ev("1 + 2*3", 0, 0, {}) == 7.0);
  CHECK(ev("2*3 + 1", 0, 0, {}) == 7.0);
  CHECK(ev("8 - 4 - 2", 0, 0, {}) == 2.0);      // left associative
  CHECK(ev("8 / 4 / 2", 0, 0, {}) == 1.0);
  CHECK(ev("2^3^2", 0, 0, {}) == 512.0);        // right associative
  CHECK(ev("-2^2", 0, 0, {}) == -4.0);          // minus wraps the power
  CHECK(ev("(1 + 2)*3", 0, 0, {}) == 9.0);
  CHECK(ev("2^-1", 0, 0, {}) == 0.5);
  CHECK(ev("min(1, 2, -3)", 0, 0, {}) == -3.0);
  CHECK(ev("max(1, 2, -3)", 0, 0, {}) == 2.0);
  CHECK(ev("abs(-2.5)", 0, 0, {}) == 2.5);
  CHECK(ev("1.5e2 + 1", 0, 0, {}) == 151.0);
}

TEST_CASE("variables and time") {
  CHECK(ev("t", 0, 2.5, {}) == 2.5);
  CHECK(ev("t*x1 - x2", 2, 2.0, {3.0, 1.0}) == 5.0);
}

TEST_CASE("evaluation domain errors") {
  CHECK_THROWS_AS(ev("log(0 - 1)", 0, 0, {}), EvalError);
  CHECK_THROWS_AS(ev("log(0)", 0, 0, {}), EvalError);
  CHECK_THROWS_AS(ev("sqrt(0 - 1)", 0, 0, {}), EvalError);
  CHECK_THROWS_AS(ev("1/x1", 1, 0, {0.0}), EvalError);
  CHECK_THROWS_AS(ev("exp(10000)", 0, 0, {}), EvalError);
  CHECK(ev("sqrt(4)", 0, 0, {}) == 2.0);
  CHECK(ev("log(exp(1))", 0, 0, {}) == doctest::Approx(1.0));
}

TEST_CASE("scalar rhs accepts s") {
  Expression f = parse_scalar_rhs("-2*s + t");
  std::vector<double> x{1.5};
  CHECK(eval(f, 1.0, x) == -2.0);
  CHECK_THROWS_AS(parse_scalar_rhs("x1"), ParseError);
  CHECK_THROWS_AS(parse_expression("s", 1), ParseError);
}

TEST_CASE("parse/print round trip is structural identity") {
  const char* corpus[] = {
      "x1*x1 + x2*x2 - 1",
      "-x1",
      "-x1^2 + 3",
      "sin(t)*cos(x1)",
      "exp(-2*t)",
      "log(x1 + 2)",
      "sqrt(x1*x1 + x2*x2)",
      "abs(x1 - x2)",
      "min(x1, x2, t)",
      "max(1, x1)",
      "t^2 - x1/x2",
      "2^3^2",
      "(x1 + x2)*(x1 - x2)",
      "1/(1 + exp(-x1))",
      "x1/x2/2",
      "x1 - x2 - 1",
      "x1 - (x2 - 1)",
      "-(x1 + x2)",
      "(x1^2)^3",
      "x1^(x2 + 1)",
      "0.5*x1 + 1.25e-3",
      "t*sin(1/t)",
      "max(x1 - 1, -x1 - 1, x2 - 1, -x2 - 1)",
      "exp(t)*(x1 + 1) - sqrt(abs(x2))",
  };
  for (const char* src : corpus) {
    CAPTURE(src);
    Expression e = parse_expression(src, 2);
    Expression round = parse_expression(to_string(e), 2);
    CHECK(structurally_equal(e, round));
  }
}

TEST_CASE("printed form keeps meaning") {
  std::vector<double> x{0.7, -1.3};
  const char* corpus[] = {"x1 - x2 - 1", "x1 - (x2 - 1)", "2^3^2",  "(x1^2)^3",
                          "-x1^2 + 3",   "x1/x2/2",       "-(x1 + x2)"};
  for (const char* src : corpus) {
    CAPTURE(src);
    Expression e = parse_expression(src, 2);
    CHECK(eval(e, 0.3, x) == eval(parse_expression(to_string(e), 2), 0.3, x));
  }
}

TEST_CASE("negate_time flips t") {
  Expression e = negate_time(parse_expression("t*x1 + sin(t)", 1));
  std::vector<double> x{2.0};
  CHECK(eval(e, -1.5, x) ==
        doctest::Approx(eval(parse_expression("t*x1 + sin(t)", 1), 1.5, x)));
}

TEST_CASE("structural equality distinguishes shapes") {
  CHECK(structurally_equal(parse_expression("x1 + 1", 1), parse_expression("x1+1", 1)));
  CHECK_FALSE(structurally_equal(parse_expression("x1 + 1", 1), parse_expression("1 + x1", 1)));
  CHECK_FALSE(structurally_equal(parse_expression("min(1, 2)", 0), parse_expression("max(1, 2)", 0)));
}
