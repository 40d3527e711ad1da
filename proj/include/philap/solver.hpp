// Regularized solves and continuation for the two-field problem, plus the
// scalar barrier problems used for warm starts and lower-bound checks.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "philap/assembly.hpp"
#include "philap/system.hpp"

namespace philap {

// Regularization pair (eps, delta) plus the kernel smoothing eta.
struct RegularizationParams {
  double eps = 1.0;
  double delta = 0.0;
  double eta = -1;  // negative: use default_grad_smoothing(mesh)
};

struct NewtonOptions {
  double residual_tol = 1e-9;  // l2 norm of the interior residual
  double step_tol = 1e-10;     // sup norm of the Newton step
  int max_iters = 200;
  int max_halvings = 40;
  int picard_iters = 30;       // frozen-coefficient fallback sweeps
  bool allow_picard = true;
  double negative_floor = -1e-12;  // below this a converged field is rejected
};

struct NewtonReport {
  int iterations = 0;
  double residual_norm = 0;
  double step_norm = 0;
  bool used_picard = false;
  bool converged = false;
};

struct RegularizedSolution {
  DiscreteField u;
  DiscreteField v;
  NewtonReport report;
  double eps = 0;
  double delta = 0;
};

// Damped Newton on the stacked interior unknowns, with a frozen-coefficient
// Picard fallback if the line search stalls.  Initial fields must be
// zero-trace.  Throws NoConvergence / NonFiniteResidual / NegativeSolution.
RegularizedSolution newton_solve(const SystemSpec& spec,
                                 const RegularizationParams& params,
                                 const DiscreteField& u0,
                                 const DiscreteField& v0,
                                 const NewtonOptions& opts = {});

// A-priori gradient-norm bound: smallest r >= 2 with
//   (l / 2^l) r^l  >  C1 r + C2 r^{s1} + C3 r^{s2} + C4,
// where the constants come from computable embedding estimates on the mesh
// (norms of the coefficients, |Omega|, the diameter, and the unit-function
// conjugate norm).  eps_independent reports whether every singular term
// admitted the eps-free estimate (no cross coupling and own exponent <= 1).
struct AprioriBound {
  double r0 = 2;
  bool eps_independent = false;
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  double lead = 0;                  // l / 2^l
  std::array<double, 2> s{1, 1};    // gamma_i + sigma_i + 1
};
AprioriBound compute_r0(const SystemSpec& spec,
                        const RegularizationParams& params);

// Scalar barrier problems (all with the level-1 truncated coefficient):
//   SingularScalar: -div(phi(|grad w|) grad w) = min(a_i,1) / (w + 1)^alpha_i
//   PowerScalar:    -div(phi(|grad w|) grad w) = min(b_i,1) (w+)^gamma_i
//   MixedScalar:    -div(phi(|grad w|) grad w) = min(a_i, b_i, 1) g_i
// with g_i = inf_{t>=0} [ 1/(t^{beta_i}+1) + t^{sigma_i} ].
enum class BarrierKind { SingularScalar, PowerScalar, MixedScalar };

struct BarrierSolution {
  DiscreteField w;
  NewtonReport report;
  BarrierKind kind = BarrierKind::SingularScalar;
  int which = 1;
  double g_value = 0;  // mixed case only
};
BarrierSolution solve_barrier(const SystemSpec& spec, BarrierKind kind,
                              int which, const NewtonOptions& opts = {});

// Linear p = 2 warm start for a nonlinear solve: both fields from a Poisson
// solve with the right-hand side frozen at the zero state, i.e. loads
// a / eps^(alpha+beta) + b * delta^(gamma+sigma).
std::array<DiscreteField, 2> zero_state_seed(const SystemSpec& spec, double eps,
                                             double delta);

// Scalar Galerkin solve of -div(phi(|grad u|) grad u) = f(x, u) with f given
// as an expression in x (y, d) and t; the state derivative for the Jacobian
// uses central differences on the expression.
DiscreteField solve_scalar(const NFunction& nf,
                           const std::shared_ptr<const Mesh>& mesh,
                           const Expression& f, const NewtonOptions& opts = {},
                           double eta = -1);

// Minimum of g(t) = 1/(t^beta + 1) + t^sigma over t in [0, 1e6]: coarse log
// scan, golden-section refinement, local quadratic polish.
struct ScalarMin {
  double t = 0;
  double value = 0;
};
ScalarMin minimize_g(double beta, double sigma);

// Largest constant C with u >= C * d at every interior node (d = boundary
// distance); the minimum of u/d over interior nodes.
double fit_lower_bound(const DiscreteField& u, const DiscreteField& d);

// One continuation stage record.  `increment` is the larger of the two
// Luxemburg function-norm increments against the previous stage; `pairing` is
// the flux pairing  sum_i <A(grad u_i^k), grad(u_i^k - u_i^{k+1})>  filled in
// once the next stage exists (0 at the last stage).
struct StageRecord {
  int stage = 0;
  double eps = 0;
  double delta = 0;
  double truncation = 0;  // coefficient cap used at this stage
  double norm_u = 0;      // Luxemburg gradient norms
  double norm_v = 0;
  double residual = 0;
  int newton_iters = 0;
  bool used_picard = false;
  double increment = 0;
  double c_lower = 0;     // min of the two distance-fit constants
  double r0 = 0;
  bool r0_eps_independent = false;
  double pairing = 0;
  double barrier_margin = 0;  // min over nodes of (field + shift - barrier)
};

struct ContinuationOptions {
  std::vector<double> schedule;  // eps values, decreasing; empty = 1/2^k, k=1..8
  double increment_tol = 1e-7;   // stop early once the increment drops below
  NewtonOptions newton{};
  double eta = -1;
  bool compute_barriers = true;
};

struct ContinuationReport {
  std::vector<StageRecord> stages;
  DiscreteField u;
  DiscreteField v;
  std::optional<DiscreteField> barrier_u;  // scalar barriers for each field
  std::optional<DiscreteField> barrier_v;
  bool stopped_early = false;
};

// Solve along a decreasing eps schedule with delta tied to the structure case
// (0 for cooperative coupling, eps otherwise), truncating the coefficients at
// level 1/eps, warm-starting each stage from the previous one.
ContinuationReport continuation_solve(const SystemSpec& spec,
                                      const ContinuationOptions& opts = {});

}  // namespace philap
