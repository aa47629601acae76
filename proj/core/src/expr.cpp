#include "plap/expr.hpp"

#include "plap/graph.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace plap {

struct Expr::Node {
  enum class Kind { number, variable, unary_neg, add, sub, mul, div, pow, call1, call2 };
  Kind kind = Kind::number;
  double value = 0.0;
  int var_index = 0;
  double (*fn1)(double) = nullptr;
  double (*fn2)(double, double) = nullptr;
  std::unique_ptr<Node> a, b;

  double eval(std::span<const double> c) const {
    switch (kind) {
      case Kind::number:
        return value;
      case Kind::variable:
        if (var_index >= static_cast<int>(c.size()))
          throw PreconditionError("expression uses coordinate axis " + std::to_string(var_index) +
                                  " beyond the lattice dimension");
        return c[static_cast<size_t>(var_index)];
      case Kind::unary_neg:
        return -a->eval(c);
      case Kind::add:
        return a->eval(c) + b->eval(c);
      case Kind::sub:
        return a->eval(c) - b->eval(c);
      case Kind::mul:
        return a->eval(c) * b->eval(c);
      case Kind::div:
        return a->eval(c) / b->eval(c);
      case Kind::pow:
        return std::pow(a->eval(c), b->eval(c));
      case Kind::call1:
        return fn1(a->eval(c));
      case Kind::call2:
        return fn2(a->eval(c), b->eval(c));
    }
    return 0.0;
  }
};

namespace {

using Node = Expr::Node;
using NodePtr = std::unique_ptr<Node>;

struct Parser {
  std::string_view s;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression: " + msg + " at position " + std::to_string(pos));
  }
  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_unique<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = make(Node::Kind::add, std::move(lhs), parse_term());
      else if (eat('-'))
        lhs = make(Node::Kind::sub, std::move(lhs), parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (eat('*'))
        lhs = make(Node::Kind::mul, std::move(lhs), parse_unary());
      else if (eat('/'))
        lhs = make(Node::Kind::div, std::move(lhs), parse_unary());
      else
        return lhs;
    }
  }

  NodePtr parse_unary() {
    if (eat('-')) return make(Node::Kind::unary_neg, parse_unary());
    if (eat('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (eat('^')) return make(Node::Kind::pow, std::move(base), parse_unary());
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of input");
    const char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s.data() + pos;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos += static_cast<size_t>(end - begin);
      auto n = make(Node::Kind::number);
      n->value = v;
      return n;
    }
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_expr();
      if (!eat(')')) fail("missing ')'");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t end = pos;
      while (end < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_'))
        ++end;
      const std::string name(s.substr(pos, end - pos));
      pos = end;
      skip_ws();
      if (pos < s.size() && s[pos] == '(') return parse_call(name);
      return parse_variable(name);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_variable(const std::string& name) {
    int axis = -1;
    if (name.size() == 1) {
      switch (name[0]) {
        case 'x': axis = 0; break;
        case 'y': axis = 1; break;
        case 'z': axis = 2; break;
        case 'w': axis = 3; break;
        default: break;
      }
    } else if (name.size() == 2 && name[0] == 'c' && std::isdigit(static_cast<unsigned char>(name[1]))) {
      axis = name[1] - '0';
    }
    if (axis < 0) fail("unknown variable '" + name + "'");
    auto n = make(Node::Kind::variable);
    n->var_index = axis;
    return n;
  }

  NodePtr parse_call(const std::string& name) {
    ++pos;  // '('
    std::vector<NodePtr> args;
    args.push_back(parse_expr());
    while (eat(',')) args.push_back(parse_expr());
    if (!eat(')')) fail("missing ')'");

    static const struct {
      const char* name;
      double (*fn)(double);
    } unary_fns[] = {{"abs", [](double x) { return std::abs(x); }},
                     {"exp", [](double x) { return std::exp(x); }},
                     {"sqrt", [](double x) { return std::sqrt(x); }},
                     {"sin", [](double x) { return std::sin(x); }},
                     {"cos", [](double x) { return std::cos(x); }}};
    for (const auto& f : unary_fns) {
      if (name == f.name) {
        if (args.size() != 1) fail(name + " takes one argument");
        auto n = make(Node::Kind::call1, std::move(args[0]));
        n->fn1 = f.fn;
        return n;
      }
    }
    if (name == "min" || name == "max") {
      if (args.size() != 2) fail(name + " takes two arguments");
      auto n = make(Node::Kind::call2, std::move(args[0]), std::move(args[1]));
      n->fn2 = name == "min" ? +[](double x, double y) { return std::min(x, y); }
                             : +[](double x, double y) { return std::max(x, y); };
      return n;
    }
    fail("unknown function '" + name + "'");
  }
};

}  // namespace

Expr Expr::parse(std::string_view text) {
  Parser p{text};
  NodePtr root = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return Expr(std::move(root));
}

double Expr::eval(std::span<const double> coords) const { return root_->eval(coords); }

Expr::Expr(std::unique_ptr<Node> root) : root_(std::move(root)) {}
Expr::Expr(Expr&&) noexcept = default;
Expr& Expr::operator=(Expr&&) noexcept = default;
Expr::~Expr() = default;

}  // namespace plap
