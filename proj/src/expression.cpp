#include "philap/expression.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <vector>

namespace philap {

namespace detail {

struct ExprNode {
  enum class Kind { Number, Var, Add, Sub, Mul, Div, Pow, Neg } kind;
  double number = 0;
  char var = 0;
  std::shared_ptr<const ExprNode> lhs, rhs;

  double eval(const EvalContext& ctx) const {
    switch (kind) {
      case Kind::Number: return number;
      case Kind::Var:
        switch (var) {
          case 'x': return ctx.x;
          case 'y': return ctx.y;
          case 'd': return ctx.d;
          case 't': return ctx.t;
        }
        return 0;
      case Kind::Add: return lhs->eval(ctx) + rhs->eval(ctx);
      case Kind::Sub: return lhs->eval(ctx) - rhs->eval(ctx);
      case Kind::Mul: return lhs->eval(ctx) * rhs->eval(ctx);
      case Kind::Div: return lhs->eval(ctx) / rhs->eval(ctx);
      case Kind::Pow: return std::pow(lhs->eval(ctx), rhs->eval(ctx));
      case Kind::Neg: return -lhs->eval(ctx);
    }
    return 0;
  }
};

}  // namespace detail

namespace {

using NodePtr = std::shared_ptr<const detail::ExprNode>;

struct Parser {
  const std::string& s;
  size_t pos = 0;

  explicit Parser(const std::string& text) : s(text) {}

  void skip() {
    while (pos < s.size() && std::isspace(unsigned(s[pos]))) ++pos;
  }

  bool consume(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "expression parse error at position " << pos << " in \"" << s
       << "\": " << what;
    throw ParseError(os.str());
  }

  NodePtr make(detail::ExprNode n) {
    return std::make_shared<detail::ExprNode>(std::move(n));
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (consume('+')) {
        lhs = make({detail::ExprNode::Kind::Add, 0, 0, lhs, parse_term()});
      } else if (consume('-')) {
        lhs = make({detail::ExprNode::Kind::Sub, 0, 0, lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (consume('*')) {
        lhs = make({detail::ExprNode::Kind::Mul, 0, 0, lhs, parse_unary()});
      } else if (consume('/')) {
        lhs = make({detail::ExprNode::Kind::Div, 0, 0, lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (consume('-')) {
      return make({detail::ExprNode::Kind::Neg, 0, 0, parse_unary(), nullptr});
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (consume('^')) {
      // right associative; exponent may carry its own sign
      NodePtr expo = parse_unary();
      return make({detail::ExprNode::Kind::Pow, 0, 0, base, expo});
    }
    return base;
  }

  NodePtr parse_atom() {
    skip();
    if (pos >= s.size()) fail("unexpected end of input");
    const char c = s[pos];
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_expr();
      if (!consume(')')) fail("missing closing parenthesis");
      return inner;
    }
    if (std::isdigit(unsigned(c)) || c == '.') {
      size_t used = 0;
      double v = 0;
      try {
        v = std::stod(s.substr(pos), &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      pos += used;
      return make({detail::ExprNode::Kind::Number, v, 0, nullptr, nullptr});
    }
    if (c == 'x' || c == 'y' || c == 'd' || c == 't') {
      ++pos;
      if (pos < s.size() && std::isalnum(unsigned(s[pos]))) {
        --pos;
        fail("unknown identifier");
      }
      return make({detail::ExprNode::Kind::Var, 0, c, nullptr, nullptr});
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Parser p(text);
  Expression e;
  e.root_ = p.parse_expr();
  p.skip();
  if (p.pos != text.size()) p.fail("trailing input");
  e.text_ = text;
  return e;
}

double Expression::eval(const EvalContext& ctx) const {
  return root_->eval(ctx);
}

}  // namespace philap
