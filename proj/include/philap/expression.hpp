// Tiny arithmetic expressions for coefficients and reaction terms: numbers,
// the coordinates x and y, the boundary distance d, the state variable t,
// with + - * / ^ and parentheses.
#pragma once

#include <memory>
#include <string>

#include "philap/errors.hpp"

namespace philap {

namespace detail {
struct ExprNode;
}

struct EvalContext {
  double x = 0;
  double y = 0;
  double d = 0;  // distance to the boundary
  double t = 0;  // state value, for reaction functions f(x, t)
};

class Expression {
 public:
  static Expression parse(const std::string& text);
  double eval(const EvalContext& ctx) const;
  const std::string& text() const { return text_; }

 private:
  std::shared_ptr<const detail::ExprNode> root_;
  std::string text_;
};

}  // namespace philap
