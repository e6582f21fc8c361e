#include "tvesim/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace tvesim {

namespace {

std::string at_pos(const std::string& text, std::size_t pos) {
  return "'" + text + "' at column " + std::to_string(pos + 1);
}

}  // namespace

// Recursive descent over the grammar
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := ('-'|'+') factor | power
//   power   := primary ('^' factor)?       (right associative)
//   primary := number | ident | ident '(' expr ')' | '(' expr ')'
class ExprParser {
 public:
  explicit ExprParser(const std::string& text) : text_(text) {}

  Expression run() {
    Expression e;
    e.text_ = text_;
    out_ = &e;
    pos_ = 0;
    skip_ws();
    if (pos_ >= text_.size()) throw ExprError("empty expression");
    e.root_ = parse_expr();
    skip_ws();
    if (pos_ < text_.size())
      throw ExprError("unexpected trailing input in " + at_pos(text_, pos_));
    return e;
  }

 private:
  using Kind = Expression::Kind;

  int add_node(Expression::Node n) {
    out_->nodes_.push_back(n);
    return static_cast<int>(out_->nodes_.size()) - 1;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+'))
        lhs = add_node({Kind::add, 0.0, 0, lhs, parse_term()});
      else if (accept('-'))
        lhs = add_node({Kind::sub, 0.0, 0, lhs, parse_term()});
      else
        return lhs;
    }
  }

  int parse_term() {
    int lhs = parse_factor();
    for (;;) {
      if (accept('*'))
        lhs = add_node({Kind::mul, 0.0, 0, lhs, parse_factor()});
      else if (accept('/'))
        lhs = add_node({Kind::div, 0.0, 0, lhs, parse_factor()});
      else
        return lhs;
    }
  }

  int parse_factor() {
    if (accept('-')) return add_node({Kind::neg, 0.0, 0, parse_factor(), -1});
    if (accept('+')) return parse_factor();
    return parse_power();
  }

  // '^' binds tighter than unary minus and is right associative; the
  // exponent may carry its own sign.
  int parse_power() {
    int base = parse_primary();
    if (accept('^')) {
      int exp = parse_factor();
      return add_node({Kind::pow, 0.0, 0, base, exp});
    }
    return base;
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ExprError("unexpected end of " + at_pos(text_, pos_));
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    if (accept('(')) {
      int inner = parse_expr();
      if (!accept(')')) throw ExprError("missing ')' in " + at_pos(text_, pos_));
      return inner;
    }
    throw ExprError("unexpected character in " + at_pos(text_, pos_));
  }

  int parse_number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ExprError("malformed number in " + at_pos(text_, pos_));
    pos_ += static_cast<std::size_t>(end - begin);
    return add_node({Kind::number, v, 0, -1, -1});
  }

  int parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    if (name == "pi") return add_node({Kind::number, 3.14159265358979323846, 0, -1, -1});
    if (name == "e") return add_node({Kind::number, 2.71828182845904523536, 0, -1, -1});
    if (name == "x") return add_node({Kind::var, 0.0, static_cast<int>(ExprVar::x), -1, -1});
    if (name == "y") return add_node({Kind::var, 0.0, static_cast<int>(ExprVar::y), -1, -1});
    if (name == "t") return add_node({Kind::var, 0.0, static_cast<int>(ExprVar::t), -1, -1});
    if (name == "r") return add_node({Kind::var, 0.0, static_cast<int>(ExprVar::r), -1, -1});
    if (name == "theta")
      return add_node({Kind::var, 0.0, static_cast<int>(ExprVar::theta), -1, -1});
    if (name == "sin" || name == "cos" || name == "exp") {
      if (!accept('(')) throw ExprError("expected '(' after '" + name + "' in " + at_pos(text_, pos_));
      int arg = parse_expr();
      if (!accept(')')) throw ExprError("missing ')' in " + at_pos(text_, pos_));
      Kind k = name == "sin" ? Kind::fsin : name == "cos" ? Kind::fcos : Kind::fexp;
      return add_node({k, 0.0, 0, arg, -1});
    }
    throw ExprError("unknown identifier '" + name + "' in " + at_pos(text_, start));
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  Expression* out_ = nullptr;
};

Expression Expression::parse(const std::string& text) { return ExprParser(text).run(); }

Expression Expression::constant(double v) {
  Expression e;
  e.text_ = std::to_string(v);
  e.nodes_.push_back({Kind::number, v, 0, -1, -1});
  e.root_ = 0;
  return e;
}

std::vector<Expression> Expression::parse_components(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && (c == ',' || c == ';')) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  std::vector<Expression> out;
  out.reserve(parts.size());
  for (const auto& p : parts) out.push_back(parse(p));
  return out;
}

double Expression::eval(const EvalContext& ctx) const { return eval_node(root_, ctx); }

double Expression::eval_node(int idx, const EvalContext& ctx) const {
  const Node& n = nodes_[static_cast<std::size_t>(idx)];
  switch (n.kind) {
    case Kind::number:
      return n.value;
    case Kind::var:
      switch (static_cast<ExprVar>(n.var)) {
        case ExprVar::x: return ctx.x;
        case ExprVar::y: return ctx.y;
        case ExprVar::t: return ctx.t;
        case ExprVar::r: return ctx.r;
        case ExprVar::theta: return ctx.theta;
      }
      return 0.0;
    case Kind::add: return eval_node(n.lhs, ctx) + eval_node(n.rhs, ctx);
    case Kind::sub: return eval_node(n.lhs, ctx) - eval_node(n.rhs, ctx);
    case Kind::mul: return eval_node(n.lhs, ctx) * eval_node(n.rhs, ctx);
    case Kind::div: return eval_node(n.lhs, ctx) / eval_node(n.rhs, ctx);
    case Kind::pow: return std::pow(eval_node(n.lhs, ctx), eval_node(n.rhs, ctx));
    case Kind::neg: return -eval_node(n.lhs, ctx);
    case Kind::fsin: return std::sin(eval_node(n.lhs, ctx));
    case Kind::fcos: return std::cos(eval_node(n.lhs, ctx));
    case Kind::fexp: return std::exp(eval_node(n.lhs, ctx));
  }
  return 0.0;
}

bool Expression::uses(ExprVar v) const {
  for (const Node& n : nodes_)
    if (n.kind == Kind::var && n.var == static_cast<int>(v)) return true;
  return false;
}

}  // namespace tvesim
