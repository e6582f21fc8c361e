#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tvesim {

// Variables an expression may reference. Which ones are meaningful depends on
// the slot the expression is used in (loads see x,y,t; radial profiles see
// x,y,r; temperature factors see theta).
enum class ExprVar { x = 0, y, t, r, theta };

struct EvalContext {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
  double r = 0.0;
  double theta = 0.0;
};

struct ExprError : std::runtime_error {
  explicit ExprError(const std::string& what) : std::runtime_error(what) {}
};

// Small arithmetic expression over (x, y, t, r, theta):
// operators + - * / ^, functions sin cos exp, constants pi e.
class Expression {
 public:
  Expression() = default;

  static Expression parse(const std::string& text);

  // Splits at top-level ',' or ';' and parses each component.
  static std::vector<Expression> parse_components(const std::string& text);

  static Expression constant(double v);

  double eval(const EvalContext& ctx) const;
  bool uses(ExprVar v) const;
  bool empty() const { return nodes_.empty(); }
  const std::string& text() const { return text_; }

 private:
  enum class Kind { number, var, add, sub, mul, div, pow, neg, fsin, fcos, fexp };
  struct Node {
    Kind kind;
    double value = 0.0;  // number
    int var = 0;         // var
    int lhs = -1;
    int rhs = -1;
  };

  double eval_node(int idx, const EvalContext& ctx) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  std::string text_;

  friend class ExprParser;
};

}  // namespace tvesim
