// Specification and validation of the regularized reaction system
//
//   -div(phi(|grad u|) grad u) = a1(x) / ((|u|+eps)^alpha1 (|v|+eps)^beta1)
//                               + b1(x) (u^+ + delta)^gamma1 (v^+ + delta)^sigma1
//   -div(phi(|grad v|) grad v) = a2(x) / ((|u|+eps)^beta2 (|v|+eps)^alpha2)
//                               + b2(x) (u^+ + delta)^sigma2 (v^+ + delta)^gamma2
//
// i.e. each equation carries the exponent alpha_i on its own unknown and
// beta_i on the other one inside the singular factor, and gamma_i / sigma_i
// in the same roles inside the power factor.
#pragma once

#include <array>
#include <optional>

#include "philap/expression.hpp"
#include "philap/mesh.hpp"
#include "philap/nfunction.hpp"
#include "philap/orlicz.hpp"

namespace philap {

enum class StructureClass { General, Cooperative, NonCooperative, Mixed };

const char* structure_name(StructureClass s);

struct SystemSpec {
  NFunction nf;
  std::shared_ptr<const Mesh> mesh;
  std::array<DiscreteField, 2> a;  // singular-term coefficients
  std::array<DiscreteField, 2> b;  // power-term coefficients
  std::array<double, 2> alpha{};
  std::array<double, 2> beta{};
  std::array<double, 2> gamma{};
  std::array<double, 2> sigma{};
  // integrability exponents for the power terms; unset = not supplied
  std::array<std::optional<double>, 2> q{};
  // growth comparison function; unset leaves that hypothesis unverified
  std::optional<NFunction> psi;
  // ambient dimension for the Sobolev-conjugate comparison; 0 = not supplied
  double n_dim = 0;
  StructureClass structure = StructureClass::General;
};

// Samples a coefficient expression over (x, y, d) at the mesh nodes.
DiscreteField sample_coefficient(std::shared_ptr<const Mesh> mesh,
                                 const Expression& expr);

enum class CheckLevel { Theorem, Solver };
enum class CheckStatus { Pass, Fail, Unverified };

struct ValidationCheck {
  std::string name;
  CheckLevel level = CheckLevel::Solver;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool solver_ok() const;   // no Solver-level failures
  bool theorem_ok() const;  // no failures at either level
};

// Runs every hypothesis check and reports each one; nothing is skipped
// silently (hypotheses that cannot be evaluated are reported Unverified).
ValidationReport validate(const SystemSpec& spec);

// Value and partial derivatives of one equation's right-hand side at a point.
struct RhsValue {
  double f = 0;
  double df_du = 0;
  double df_dv = 0;
};

// Scalar core shared by nodal evaluation and assembly: coefficients and state
// are already localized.  `which` selects the equation (1 or 2).
RhsValue rhs_point(const SystemSpec& spec, int which, double a_val,
                   double b_val, double u, double v, double eps, double delta,
                   bool with_derivatives);

// Right-hand side of equation `which` at a node, with the regularization
// conventions above.  Requires eps > 0 unless all singular exponents vanish.
double rhs_eval(const SystemSpec& spec, const DiscreteField& u,
                const DiscreteField& v, double eps, double delta, int node,
                int which);

}  // namespace philap
