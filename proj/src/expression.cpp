#include "invar/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace invar {
namespace {

struct FuncInfo {
  std::string_view name;
  Func func;
  bool variadic;  // min/max take two or more arguments, the rest exactly one
};

constexpr FuncInfo kFuncs[] = {
    {"sin", Func::sin, false}, {"cos", Func::cos, false},
    {"exp", Func::exp, false}, {"log", Func::log, false},
    {"sqrt", Func::sqrt, false}, {"abs", Func::abs, false},
    {"min", Func::min, true},  {"max", Func::max, true},
};

std::string_view func_name(Func f) {
  for (const auto& info : kFuncs) {
    if (info.func == f) return info.name;
  }
  return "?";
}

class Parser {
 public:
  Parser(std::string_view src, int dimension, bool s_alias)
      : src_(src), dimension_(dimension), s_alias_(s_alias) {}

  Expression run() {
    Expression e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  int dimension_;
  bool s_alias_;

  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << "syntax error at offset " << (pos_ + 1) << ": " << msg;
    throw ParseError(os.str(), pos_ + 1);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) fail(std::string("expected ") + what);
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  Expression parse_expr() {
    Expression lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        Expression node;
        node.kind = ExprKind::add;
        node.args = {std::move(lhs), parse_term()};
        lhs = std::move(node);
      } else if (accept('-')) {
        Expression node;
        node.kind = ExprKind::sub;
        node.args = {std::move(lhs), parse_term()};
        lhs = std::move(node);
      } else {
        return lhs;
      }
    }
  }

  Expression parse_term() {
    Expression lhs = parse_factor();
    for (;;) {
      if (accept('*')) {
        Expression node;
        node.kind = ExprKind::mul;
        node.args = {std::move(lhs), parse_factor()};
        lhs = std::move(node);
      } else if (accept('/')) {
        Expression node;
        node.kind = ExprKind::div;
        node.args = {std::move(lhs), parse_factor()};
        lhs = std::move(node);
      } else {
        return lhs;
      }
    }
  }

  Expression parse_factor() {
    bool negated = accept('-');
    Expression base = parse_atom();
    if (accept('^')) {
      Expression node;
      node.kind = ExprKind::pow;
      node.args = {std::move(base), parse_factor()};
      base = std::move(node);
    }
    if (negated) {
      Expression node;
      node.kind = ExprKind::negate;
      node.args = {std::move(base)};
      base = std::move(node);
    }
    return base;
  }

  Expression parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expression inner = parse_expr();
      expect(')', "')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    fail("bad token");
  }

  Expression parse_number() {
    std::size_t start = pos_;
    const char* begin = src_.data() + start;
    const char* end = src_.data() + src_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) fail("bad number");
    pos_ = static_cast<std::size_t>(ptr - src_.data());
    Expression e;
    e.kind = ExprKind::number;
    e.number = value;
    return e;
  }

  Expression parse_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string_view name = src_.substr(start, pos_ - start);

    if (name == "t") {
      Expression e;
      e.kind = ExprKind::time_var;
      return e;
    }
    if (s_alias_ && name == "s") {
      Expression e;
      e.kind = ExprKind::state_var;
      e.var_index = 1;
      return e;
    }
    if (!s_alias_ && name.size() >= 2 && name[0] == 'x') {
      int idx = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec == std::errc() && ptr == name.data() + name.size() && idx >= 1) {
        if (idx > dimension_) {
          pos_ = start;
          std::ostringstream os;
          os << "state variable " << name << " exceeds dimension " << dimension_;
          fail(os.str());
        }
        Expression e;
        e.kind = ExprKind::state_var;
        e.var_index = idx;
        return e;
      }
    }
    for (const auto& info : kFuncs) {
      if (name == info.name) return parse_call(info);
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  Expression parse_call(const FuncInfo& info) {
    expect('(', "'(' after function name");
    Expression e;
    e.kind = ExprKind::call;
    e.func = info.func;
    e.args.push_back(parse_expr());
    while (accept(',')) e.args.push_back(parse_expr());
    expect(')', "')'");
    if (info.variadic ? e.args.size() < 2 : e.args.size() != 1) {
      std::ostringstream os;
      os << "wrong argument count for " << info.name;
      fail(os.str());
    }
    return e;
  }
};

int precedence(const Expression& e) {
  switch (e.kind) {
    case ExprKind::add:
    case ExprKind::sub:
      return 1;
    case ExprKind::mul:
    case ExprKind::div:
      return 2;
    case ExprKind::negate:
      return 3;
    case ExprKind::pow:
      return 4;
    default:
      return 5;
  }
}

void print_number(std::ostream& os, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  os << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
}

void print(std::ostream& os, const Expression& e, int parent_prec, bool right_of_pow) {
  int prec = precedence(e);
  bool paren = prec < parent_prec || (e.kind == ExprKind::pow && parent_prec == 4 && !right_of_pow);
  if (paren) os << '(';
  switch (e.kind) {
    case ExprKind::number:
      if (e.number < 0) {
        os << '(';
        print_number(os, e.number);
        os << ')';
      } else {
        print_number(os, e.number);
      }
      break;
    case ExprKind::time_var:
      os << 't';
      break;
    case ExprKind::state_var:
      os << 'x' << e.var_index;
      break;
    case ExprKind::negate:
      os << '-';
      print(os, e.args[0], 4, false);
      break;
    case ExprKind::add:
      print(os, e.args[0], 1, false);
      os << " + ";
      print(os, e.args[1], 2, false);
      break;
    case ExprKind::sub:
      print(os, e.args[0], 1, false);
      os << " - ";
      print(os, e.args[1], 2, false);
      break;
    case ExprKind::mul:
      print(os, e.args[0], 2, false);
      os << "*";
      print(os, e.args[1], 3, false);
      break;
    case ExprKind::div:
      print(os, e.args[0], 2, false);
      os << "/";
      print(os, e.args[1], 3, false);
      break;
    case ExprKind::pow:
      print(os, e.args[0], 5, false);
      os << "^";
      print(os, e.args[1], 4, true);
      break;
    case ExprKind::call:
      os << func_name(e.func) << '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) os << ", ";
        print(os, e.args[i], 0, false);
      }
      os << ')';
      break;
  }
  if (paren) os << ')';
}

[[noreturn]] void eval_fail(const char* what) { throw EvalError(what); }

double checked(double v, const char* op) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "non-finite result in " << op;
    throw EvalError(os.str());
  }
  return v;
}

}  // namespace

Expression parse_expression(std::string_view source, int dimension) {
  if (dimension < 0) throw DimensionError("dimension must be non-negative");
  return Parser(source, dimension, /*s_alias=*/false).run();
}

Expression parse_scalar_rhs(std::string_view source) {
  return Parser(source, 1, /*s_alias=*/true).run();
}

std::string to_string(const Expression& e) {
  std::ostringstream os;
  print(os, e, 0, false);
  return os.str();
}

double eval(const Expression& e, double t, std::span<const double> x) {
  switch (e.kind) {
    case ExprKind::number:
      return e.number;
    case ExprKind::time_var:
      return t;
    case ExprKind::state_var: {
      std::size_t i = static_cast<std::size_t>(e.var_index - 1);
      if (i >= x.size()) eval_fail("state variable index out of range");
      return x[i];
    }
    case ExprKind::negate:
      return -eval(e.args[0], t, x);
    case ExprKind::add:
      return checked(eval(e.args[0], t, x) + eval(e.args[1], t, x), "+");
    case ExprKind::sub:
      return checked(eval(e.args[0], t, x) - eval(e.args[1], t, x), "-");
    case ExprKind::mul:
      return checked(eval(e.args[0], t, x) * eval(e.args[1], t, x), "*");
    case ExprKind::div: {
      double den = eval(e.args[1], t, x);
      if (den == 0.0) eval_fail("division by zero");
      return checked(eval(e.args[0], t, x) / den, "/");
    }
    case ExprKind::pow:
      return checked(std::pow(eval(e.args[0], t, x), eval(e.args[1], t, x)), "^");
    case ExprKind::call: {
      double a = eval(e.args[0], t, x);
      switch (e.func) {
        case Func::sin:
          return std::sin(a);
        case Func::cos:
          return std::cos(a);
        case Func::exp:
          return checked(std::exp(a), "exp");
        case Func::log:
          if (a <= 0.0) eval_fail("log of non-positive value");
          return std::log(a);
        case Func::sqrt:
          if (a < 0.0) eval_fail("sqrt of negative value");
          return std::sqrt(a);
        case Func::abs:
          return std::fabs(a);
        case Func::min: {
          double m = a;
          for (std::size_t i = 1; i < e.args.size(); ++i) m = std::min(m, eval(e.args[i], t, x));
          return m;
        }
        case Func::max: {
          double m = a;
          for (std::size_t i = 1; i < e.args.size(); ++i) m = std::max(m, eval(e.args[i], t, x));
          return m;
        }
      }
      eval_fail("bad call");
    }
  }
  eval_fail("bad expression node");
}

double eval_at(const Expression& e, double t) { return eval(e, t, {}); }

bool structurally_equal(const Expression& a, const Expression& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case ExprKind::number:
      if (a.number != b.number) return false;
      break;
    case ExprKind::state_var:
      if (a.var_index != b.var_index) return false;
      break;
    case ExprKind::call:
      if (a.func != b.func) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!structurally_equal(a.args[i], b.args[i])) return false;
  return true;
}

bool depends_on_state(const Expression& e) {
  if (e.kind == ExprKind::state_var) return true;
  for (const auto& a : e.args)
    if (depends_on_state(a)) return true;
  return false;
}

bool depends_on_time(const Expression& e) {
  if (e.kind == ExprKind::time_var) return true;
  for (const auto& a : e.args)
    if (depends_on_time(a)) return true;
  return false;
}

int max_state_index(const Expression& e) {
  int m = e.kind == ExprKind::state_var ? e.var_index : 0;
  for (const auto& a : e.args) m = std::max(m, max_state_index(a));
  return m;
}

Expression negate_time(const Expression& e) {
  if (e.kind == ExprKind::time_var) {
    Expression neg;
    neg.kind = ExprKind::negate;
    neg.args.push_back(e);
    return neg;
  }
  Expression out = e;
  for (std::size_t i = 0; i < out.args.size(); ++i) out.args[i] = negate_time(e.args[i]);
  return out;
}

Expression negate_expression(const Expression& e) {
  if (e.kind == ExprKind::negate) return e.args[0];
  Expression neg;
  neg.kind = ExprKind::negate;
  neg.args.push_back(e);
  return neg;
}

}  // namespace invar
