#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace plap {

/// Small arithmetic expression over lattice coordinates, used for initial
/// data specs. Variables: x, y, z, w (first four axes) and c0..c9; operators
/// + - * / ^ with parentheses; functions abs, exp, sqrt, sin, cos,
/// min(a,b), max(a,b). ParseError on bad syntax.
class Expr {
 public:
  static Expr parse(std::string_view text);
  double eval(std::span<const double> coords) const;

  Expr(Expr&&) noexcept;
  Expr& operator=(Expr&&) noexcept;
  ~Expr();

  struct Node;  // AST node, defined in the implementation

 private:
  explicit Expr(std::unique_ptr<Node> root);
  std::unique_ptr<Node> root_;
};

}  // namespace plap
