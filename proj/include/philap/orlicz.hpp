// Modulars, Luxemburg norms, and the norm inequalities fields inherit from the
// kernel's growth exponents.  The gradient modular integrates the elementwise
// constant |grad u| exactly; the function modular uses the mesh quadrature on
// the interpolated field.
#pragma once

#include "philap/mesh.hpp"
#include "philap/nfunction.hpp"

namespace philap {

enum class NormKind { Function, Gradient };

// integral of Phi(|u|) (or of the conjugate applied to |u|) over the domain.
double modular(const NFunction& nf, const DiscreteField& u,
               NormKind kind = NormKind::Function, bool conjugate = false);

// Luxemburg norm inf{lambda > 0 : modular(u/lambda) <= 1}, by bisection with
// the given relative tolerance on lambda.  Zero fields have norm zero.
double luxemburg_norm(const NFunction& nf, const DiscreteField& u,
                      NormKind kind = NormKind::Function,
                      bool conjugate = false, double rel_tol = 1e-10);

// integral of u v over the domain (exact for P1 factors).
double integrate_product(const DiscreteField& u, const DiscreteField& v);

struct PoincareReport {
  double lhs = 0;    // modular of u
  double rhs = 0;    // modular of 2 * diameter * |grad u|
  double slack = 0;  // rhs - lhs
};

// Checks the modular Poincare inequality for a zero-trace field and returns
// both sides.  Throws BoundViolation if the inequality fails beyond relative
// slack 1e-9, InvalidSpec if the field is not zero-trace.
PoincareReport check_poincare(const NFunction& nf, const DiscreteField& u);

}  // namespace philap
