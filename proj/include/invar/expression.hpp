#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "invar/errors.hpp"

namespace invar {

// Immutable arithmetic expression over the time variable t and state
// variables x1..xk.  Built by parse_expression, evaluated with eval.
//
// Grammar (whitespace insignificant):
//   expr   := term (("+" | "-") term)*
//   term   := factor (("*" | "/") factor)*
//   factor := ("-")? atom ("^" factor)?
//   atom   := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
// with idents t, x1..xk and the calls sin, cos, exp, log, sqrt, abs
// (unary) and min, max (two or more arguments).

enum class ExprKind {
  number,
  time_var,   // t
  state_var,  // x1..xk, var_index 1-based
  negate,
  add,
  sub,
  mul,
  div,
  pow,  // right-associative
  call,
};

enum class Func { sin, cos, exp, log, sqrt, abs, min, max };

struct Expression {
  ExprKind kind = ExprKind::number;
  double number = 0.0;
  int var_index = 0;
  Func func = Func::sin;
  std::vector<Expression> args;
};

// Parses source against the grammar above with state variables x1..xk
// (dimension = k; pass 0 for expressions in t alone).  Throws ParseError.
Expression parse_expression(std::string_view source, int dimension);

// Same grammar, but the single state variable is spelled "s" instead of
// "x1".  Used for scalar majorant right sides F(t, s).
Expression parse_scalar_rhs(std::string_view source);

// Canonical text form; parse_expression(to_string(e)) reproduces e
// structurally.
std::string to_string(const Expression& e);

double eval(const Expression& e, double t, std::span<const double> x);

// Convenience for expressions in t alone.
double eval_at(const Expression& e, double t);

bool structurally_equal(const Expression& a, const Expression& b);

bool depends_on_state(const Expression& e);
bool depends_on_time(const Expression& e);

// Largest k such that xk appears (0 when no state variable does).
int max_state_index(const Expression& e);

// e with every occurrence of t replaced by -t (time reversal).
Expression negate_time(const Expression& e);

// -e, simplifying a leading negation.
Expression negate_expression(const Expression& e);

inline Expression make_number(double v) {
  Expression e;
  e.kind = ExprKind::number;
  e.number = v;
  return e;
}

}  // namespace invar
