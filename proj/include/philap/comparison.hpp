// Discrete comparison test for the scalar equation
//   -div(phi(|grad u|) grad u) = f(x, u)
// between a sub- and a supersolution pair, together with the convexity and
// energy diagnostics that back it up.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "philap/expression.hpp"
#include "philap/mesh.hpp"
#include "philap/nfunction.hpp"

namespace philap {

// Energy of the l-th root of a nonnegative nodal field:
//   J(w) = integral Phi(|grad w^{1/l}|).
// Returns nullopt when the value is not finite (negative nodes or overflow),
// playing the role of the extended value +infinity.
std::optional<double> j_functional(const NFunction& nf, const DiscreteField& w);

// Convexity probe for h(t) = Phi(t^{1/l}) on a grid: second divided
// differences of consecutive triples plus random midpoint checks.  Negative
// margins beyond the slack count as violations.
struct ConvexityReport {
  double worst_second_difference = 0;  // most negative scaled second difference
  double worst_midpoint_margin = 0;    // most negative midpoint slack
  int violations = 0;
  int checked = 0;
};
ConvexityReport check_phi_power_convexity(const NFunction& nf,
                                          const std::vector<double>& grid,
                                          int midpoint_samples = 200,
                                          unsigned seed = 1234);

// One comparison instance: u1 intended as subsolution, u2 as supersolution of
// the same equation, with f given as an expression in x (y, d) and t.
struct ComparisonInstance {
  NFunction nf;
  std::shared_ptr<const Mesh> mesh;
  DiscreteField u1;
  DiscreteField u2;
  Expression f;
  double residual_tol = 1e-7;     // one-sided residual slack per interior node
  double ordering_tol = 1e-10;    // allowed ordering defect
  double positivity_floor = 1e-13;  // nodes below this are excluded from the
                                    // energy pairing
  std::string id;
};

enum class ComparisonVerdict { Pass, HypothesisFailure, OrderingViolation };
const char* verdict_name(ComparisonVerdict v);

struct ComparisonReport {
  ComparisonVerdict verdict = ComparisonVerdict::Pass;
  bool sub_ok = false;       // u1 residual <= tol at every interior node
  bool super_ok = false;     // u2 residual >= -tol at every interior node
  bool monotone_ok = false;  // f(x,t)/t^{l-1} decreasing in t
  bool boundary_ok = false;  // u1 <= u2 on the boundary
  double worst_sub_residual = 0;    // max interior residual of u1
  double worst_super_residual = 0;  // min interior residual of u2
  double ordering_margin = 0;       // min over nodes of u2 - u1
  int worst_node = -1;
  double ratio_bound = 0;  // max interior u1/u2 (inf if u2 ~ 0 under u1 > 0)
  double pairing = 0;      // flux pairing against the truncated test pair
  int excluded_nodes = 0;  // pairing exclusions from the positivity floor
  std::string detail;
};

// Runs the hypothesis checks and the ordering check; the verdict reports a
// hypothesis failure in preference to an ordering violation.
ComparisonReport comparison_test(const ComparisonInstance& inst);

}  // namespace philap
