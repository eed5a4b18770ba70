#include "pvs/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "pvs/errors.hpp"

namespace pvs::expr {

enum class Kind { constant, variable, add, sub, mul, div, neg, pow, fn };

struct Node {
  Kind kind;
  double c = 0.0;      // constant value or pow exponent
  int var = -1;        // variable index
  std::string fname;   // sqrt, exp, sin, cos
  NodePtr a, b;
};

namespace {

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::constant;
  n->c = v;
  return n;
}

NodePtr make_var(int i) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::variable;
  n->var = i;
  return n;
}

NodePtr make_bin(Kind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_neg(NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::neg;
  n->a = std::move(a);
  return n;
}

NodePtr make_pow(NodePtr base, double expo) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::pow;
  n->a = std::move(base);
  n->c = expo;
  return n;
}

NodePtr make_fn(std::string name, NodePtr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::fn;
  n->fname = std::move(name);
  n->a = std::move(arg);
  return n;
}

bool is_const(const NodePtr& n, double v) {
  return n->kind == Kind::constant && n->c == v;
}

double eval_node(const Node* n, std::span<const double> vals) {
  switch (n->kind) {
    case Kind::constant: return n->c;
    case Kind::variable: return vals[static_cast<std::size_t>(n->var)];
    case Kind::add: return eval_node(n->a.get(), vals) + eval_node(n->b.get(), vals);
    case Kind::sub: return eval_node(n->a.get(), vals) - eval_node(n->b.get(), vals);
    case Kind::mul: return eval_node(n->a.get(), vals) * eval_node(n->b.get(), vals);
    case Kind::div: return eval_node(n->a.get(), vals) / eval_node(n->b.get(), vals);
    case Kind::neg: return -eval_node(n->a.get(), vals);
    case Kind::pow: return std::pow(eval_node(n->a.get(), vals), n->c);
    case Kind::fn: {
      double u = eval_node(n->a.get(), vals);
      if (n->fname == "sqrt") return std::sqrt(u);
      if (n->fname == "exp") return std::exp(u);
      if (n->fname == "sin") return std::sin(u);
      return std::cos(u);
    }
  }
  return 0.0;
}

NodePtr simplify(NodePtr n);

NodePtr simplified_bin(Kind k, NodePtr a, NodePtr b) {
  if (a->kind == Kind::constant && b->kind == Kind::constant) {
    switch (k) {
      case Kind::add: return make_const(a->c + b->c);
      case Kind::sub: return make_const(a->c - b->c);
      case Kind::mul: return make_const(a->c * b->c);
      case Kind::div: return make_const(a->c / b->c);
      default: break;
    }
  }
  switch (k) {
    case Kind::add:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case Kind::sub:
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return simplify(make_neg(b));
      break;
    case Kind::mul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      if (is_const(a, -1.0)) return simplify(make_neg(b));
      if (is_const(b, -1.0)) return simplify(make_neg(a));
      break;
    case Kind::div:
      if (is_const(a, 0.0)) return make_const(0.0);
      if (is_const(b, 1.0)) return a;
      break;
    default: break;
  }
  return make_bin(k, std::move(a), std::move(b));
}

NodePtr simplify(NodePtr n) {
  switch (n->kind) {
    case Kind::constant:
    case Kind::variable: return n;
    case Kind::add:
    case Kind::sub:
    case Kind::mul:
    case Kind::div: return simplified_bin(n->kind, simplify(n->a), simplify(n->b));
    case Kind::neg: {
      NodePtr a = simplify(n->a);
      if (a->kind == Kind::constant) return make_const(-a->c);
      if (a->kind == Kind::neg) return a->a;
      return make_neg(a);
    }
    case Kind::pow: {
      NodePtr a = simplify(n->a);
      if (n->c == 0.0) return make_const(1.0);
      if (n->c == 1.0) return a;
      if (a->kind == Kind::constant) return make_const(std::pow(a->c, n->c));
      return make_pow(a, n->c);
    }
    case Kind::fn: {
      NodePtr a = simplify(n->a);
      if (a->kind == Kind::constant) {
        double vals[1] = {0.0};
        Node tmp = *n;
        tmp.a = a;
        return make_const(eval_node(&tmp, vals));
      }
      return make_fn(n->fname, a);
    }
  }
  return n;
}

NodePtr diff(const NodePtr& n, int var) {
  switch (n->kind) {
    case Kind::constant: return make_const(0.0);
    case Kind::variable: return make_const(n->var == var ? 1.0 : 0.0);
    case Kind::add: return make_bin(Kind::add, diff(n->a, var), diff(n->b, var));
    case Kind::sub: return make_bin(Kind::sub, diff(n->a, var), diff(n->b, var));
    case Kind::mul:
      return make_bin(Kind::add, make_bin(Kind::mul, diff(n->a, var), n->b),
                      make_bin(Kind::mul, n->a, diff(n->b, var)));
    case Kind::div:
      return make_bin(Kind::div,
                      make_bin(Kind::sub, make_bin(Kind::mul, diff(n->a, var), n->b),
                               make_bin(Kind::mul, n->a, diff(n->b, var))),
                      make_bin(Kind::mul, n->b, n->b));
    case Kind::neg: return make_neg(diff(n->a, var));
    case Kind::pow:
      // d(u^c) = c u^(c-1) u'
      return make_bin(Kind::mul, make_const(n->c),
                      make_bin(Kind::mul, make_pow(n->a, n->c - 1.0), diff(n->a, var)));
    case Kind::fn: {
      NodePtr du = diff(n->a, var);
      if (n->fname == "sqrt")
        return make_bin(Kind::div, du, make_bin(Kind::mul, make_const(2.0), make_fn("sqrt", n->a)));
      if (n->fname == "exp") return make_bin(Kind::mul, make_fn("exp", n->a), du);
      if (n->fname == "sin") return make_bin(Kind::mul, make_fn("cos", n->a), du);
      return make_neg(make_bin(Kind::mul, make_fn("sin", n->a), du));
    }
  }
  return make_const(0.0);
}

void print_node(const Node* n, std::ostringstream& os) {
  switch (n->kind) {
    case Kind::constant: os << n->c; break;
    case Kind::variable: os << "v" << n->var; break;
    case Kind::add: os << '('; print_node(n->a.get(), os); os << '+'; print_node(n->b.get(), os); os << ')'; break;
    case Kind::sub: os << '('; print_node(n->a.get(), os); os << '-'; print_node(n->b.get(), os); os << ')'; break;
    case Kind::mul: os << '('; print_node(n->a.get(), os); os << '*'; print_node(n->b.get(), os); os << ')'; break;
    case Kind::div: os << '('; print_node(n->a.get(), os); os << '/'; print_node(n->b.get(), os); os << ')'; break;
    case Kind::neg: os << "(-"; print_node(n->a.get(), os); os << ')'; break;
    case Kind::pow: os << '('; print_node(n->a.get(), os); os << '^' << n->c << ')'; break;
    case Kind::fn: os << n->fname << '('; print_node(n->a.get(), os); os << ')'; break;
  }
}

struct Parser {
  const std::string& text;
  const std::vector<std::string>& vars;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression \"" + text + "\": " + msg + " at position " + std::to_string(pos));
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (eat('+')) lhs = make_bin(Kind::add, lhs, parse_term());
      else if (eat('-')) lhs = make_bin(Kind::sub, lhs, parse_term());
      else return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (eat('*')) lhs = make_bin(Kind::mul, lhs, parse_unary());
      else if (eat('/')) lhs = make_bin(Kind::div, lhs, parse_unary());
      else return lhs;
    }
  }

  NodePtr parse_unary() {
    if (eat('-')) return make_neg(parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (eat('^')) {
      NodePtr e = parse_unary();
      NodePtr folded = simplify(e);
      if (folded->kind != Kind::constant) fail("exponent must be a numeric constant");
      return make_pow(base, folded->c);
    }
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input");
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* start = text.c_str() + pos;
      char* end = nullptr;
      double v = std::strtod(start, &end);
      if (end == start) fail("bad number");
      pos += static_cast<std::size_t>(end - start);
      return make_const(v);
    }
    if (c == '(') {
      ++pos;
      NodePtr e = parse_expr();
      if (!eat(')')) fail("missing )");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
        ++pos;
      std::string name = text.substr(start, pos - start);
      if (peek() == '(') {
        if (name != "sqrt" && name != "exp" && name != "sin" && name != "cos")
          fail("unknown function " + name);
        ++pos;
        NodePtr arg = parse_expr();
        if (!eat(')')) fail("missing )");
        return make_fn(name, arg);
      }
      if (name == "pi") return make_const(3.14159265358979323846);
      for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == name) return make_var(static_cast<int>(i));
      fail("unknown variable " + name);
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

Expression Expression::parse(const std::string& text, const std::vector<std::string>& vars) {
  Parser p{text, vars};
  NodePtr root = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return Expression(simplify(root), static_cast<int>(vars.size()));
}

double Expression::eval(std::span<const double> values) const {
  if (!root_) throw ConfigError("expression: evaluating empty expression");
  if (static_cast<int>(values.size()) < nvars_)
    throw ConfigError("expression: not enough variable values");
  return eval_node(root_.get(), values);
}

Expression Expression::derivative(int var) const {
  if (!root_) throw ConfigError("expression: differentiating empty expression");
  return Expression(simplify(diff(root_, var)), nvars_);
}

bool Expression::is_constant() const { return root_ && root_->kind == Kind::constant; }

std::string Expression::str() const {
  if (!root_) return "<empty>";
  std::ostringstream os;
  print_node(root_.get(), os);
  return os.str();
}

}  // namespace pvs::expr
