#include "philap/solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "philap/expression.hpp"
#include "philap/orlicz.hpp"

namespace philap {
namespace {

Eigen::VectorXd pack(const DofMap& dofs, const std::vector<DiscreteField>& f) {
  Eigen::VectorXd x(dofs.size());
  for (int fld = 0; fld < dofs.fields(); ++fld)
    for (int node : dofs.interior_nodes())
      x[dofs.index(fld, node)] = f[fld][node];
  return x;
}

void unpack(const DofMap& dofs, const Eigen::VectorXd& x,
            std::vector<DiscreteField>& f) {
  for (int fld = 0; fld < dofs.fields(); ++fld)
    for (int node : dofs.interior_nodes())
      f[fld].values()[node] = x[dofs.index(fld, node)];
}

Eigen::VectorXd sparse_solve(const Eigen::SparseMatrix<double>& J,
                             const Eigen::VectorXd& rhs) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(J);
  if (lu.info() != Eigen::Success) {
    // Retry once with a small diagonal shift before giving up.
    double scale = 0;
    for (int k = 0; k < J.rows(); ++k) scale = std::max(scale, std::abs(J.coeff(k, k)));
    Eigen::SparseMatrix<double> shifted = J;
    Eigen::SparseMatrix<double> eye(J.rows(), J.cols());
    eye.setIdentity();
    shifted += (1e-12 * (scale + 1.0)) * eye;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success)
      throw NoConvergence("linear solver failed to factorize the Jacobian");
  }
  Eigen::VectorXd dx = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !dx.allFinite())
    throw NoConvergence("linear solve produced a non-finite step");
  return dx;
}

enum class CoreStatus { Converged, Stalled, MaxIters };

struct CoreOutcome {
  std::vector<DiscreteField> fields;
  NewtonReport report;
  CoreStatus status = CoreStatus::MaxIters;
};

CoreOutcome newton_core(const GalerkinProblem& prob,
                        std::vector<DiscreteField> fields,
                        const NewtonOptions& opts) {
  const DofMap dofs(*prob.mesh, prob.n_fields);
  CoreOutcome out;
  Eigen::VectorXd x = pack(dofs, fields);
  Eigen::VectorXd R;
  assemble(prob, dofs, fields, &R, nullptr);
  if (!R.allFinite())
    throw NonFiniteResidual("residual is not finite at the initial state");
  out.report.residual_norm = R.norm();

  std::vector<DiscreteField> trial = fields;
  for (int it = 0; it < opts.max_iters; ++it) {
    // Converged once the residual is small and the last step was small too
    // (the initial state counts as a zero step).
    if (out.report.residual_norm <= opts.residual_tol &&
        out.report.step_norm <= opts.step_tol) {
      out.report.converged = true;
      out.status = CoreStatus::Converged;
      out.fields = std::move(fields);
      return out;
    }
    Eigen::SparseMatrix<double> J;
    assemble(prob, dofs, fields, nullptr, &J);
    const Eigen::VectorXd dx = sparse_solve(J, -R);

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd Rtry;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      const Eigen::VectorXd xt = x + t * dx;
      unpack(dofs, xt, trial);
      assemble(prob, dofs, trial, &Rtry, nullptr);
      if (Rtry.allFinite() &&
          Rtry.norm() < out.report.residual_norm * (1.0 - 1e-4 * t)) {
        x = xt;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // At the residual floor no step can decrease the norm further; if the
      // residual target is already met, report convergence instead of a stall.
      if (out.report.residual_norm <= opts.residual_tol) {
        out.report.step_norm = 0;
        out.report.converged = true;
        out.status = CoreStatus::Converged;
      } else {
        out.status = CoreStatus::Stalled;
      }
      out.fields = std::move(fields);
      return out;
    }
    std::swap(fields, trial);
    R = Rtry;
    out.report.residual_norm = R.norm();
    out.report.step_norm = t * dx.lpNorm<Eigen::Infinity>();
    ++out.report.iterations;
    if (out.report.step_norm <= opts.step_tol &&
        out.report.residual_norm > opts.residual_tol) {
      out.status = CoreStatus::Stalled;
      out.fields = std::move(fields);
      return out;
    }
  }
  if (out.report.residual_norm <= opts.residual_tol &&
      out.report.step_norm <= opts.step_tol) {
    out.report.converged = true;
    out.status = CoreStatus::Converged;
  }
  out.fields = std::move(fields);
  return out;
}

// Frozen-coefficient sweeps: each field solves a linear problem with the
// kernel weight and the source both evaluated at the previous iterate.
std::vector<DiscreteField> picard_sweeps(const GalerkinProblem& prob,
                                         std::vector<DiscreteField> fields,
                                         int sweeps, double relax = 0.5) {
  const Mesh& mesh = *prob.mesh;
  const DofMap dofs(mesh, 1);
  const int ni = dofs.interior_count();
  const int npe = mesh.nodes_per_element();
  std::array<Mesh::QuadPoint, 3> qps;

  for (int s = 0; s < sweeps; ++s) {
    const std::vector<DiscreteField> old = fields;
    for (int f = 0; f < prob.n_fields; ++f) {
      std::vector<Eigen::Triplet<double>> trips;
      Eigen::VectorXd load = Eigen::VectorXd::Zero(ni);
      for (int e = 0; e < mesh.element_count(); ++e) {
        const auto& conn = mesh.element(e);
        const double area = mesh.element_measure(e);
        const auto g = old[f].gradient(e);
        const double gm =
            std::sqrt(g[0] * g[0] + g[1] * g[1] + prob.eta * prob.eta);
        const double w = prob.nf.kernel().phi(gm);
        for (int j = 0; j < npe; ++j) {
          const int row = dofs.index(0, conn[j]);
          if (row < 0) continue;
          const auto& gj = mesh.basis_gradient(e, j);
          for (int k = 0; k < npe; ++k) {
            const int col = dofs.index(0, conn[k]);
            if (col < 0) continue;
            const auto& gk = mesh.basis_gradient(e, k);
            trips.emplace_back(row, col,
                               area * w * (gj[0] * gk[0] + gj[1] * gk[1]));
          }
        }
        mesh.quadrature(e, qps);
        for (const auto& qp : qps) {
          std::array<double, 2> state{0.0, 0.0};
          for (int ff = 0; ff < prob.n_fields; ++ff)
            state[ff] = old[ff].at(e, qp);
          const PointSource src = prob.source(f, e, qp, state, false);
          for (int j = 0; j < npe; ++j) {
            const int row = dofs.index(0, conn[j]);
            if (row < 0) continue;
            load[row] += qp.weight * src.f * qp.shape[j];
          }
        }
      }
      Eigen::SparseMatrix<double> K(ni, ni);
      K.setFromTriplets(trips.begin(), trips.end());
      K.makeCompressed();
      const Eigen::VectorXd z = sparse_solve(K, load);
      for (int node : dofs.interior_nodes()) {
        const int row = dofs.index(0, node);
        fields[f].values()[node] =
            (1.0 - relax) * old[f][node] + relax * z[row];
      }
    }
  }
  return fields;
}

// Linear p = 2 solve used to seed iterations: z with
// integral(grad z . grad test) = integral(load * test).
DiscreteField linear_seed(const std::shared_ptr<const Mesh>& mesh,
                          const std::function<double(int, const Mesh::QuadPoint&)>& load) {
  const DofMap dofs(*mesh, 1);
  const int ni = dofs.interior_count();
  const int npe = mesh->nodes_per_element();
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ni);
  std::array<Mesh::QuadPoint, 3> qps;
  for (int e = 0; e < mesh->element_count(); ++e) {
    const auto& conn = mesh->element(e);
    const double area = mesh->element_measure(e);
    for (int j = 0; j < npe; ++j) {
      const int row = dofs.index(0, conn[j]);
      if (row < 0) continue;
      const auto& gj = mesh->basis_gradient(e, j);
      for (int k = 0; k < npe; ++k) {
        const int col = dofs.index(0, conn[k]);
        if (col < 0) continue;
        const auto& gk = mesh->basis_gradient(e, k);
        trips.emplace_back(row, col, area * (gj[0] * gk[0] + gj[1] * gk[1]));
      }
    }
    mesh->quadrature(e, qps);
    for (const auto& qp : qps) {
      const double f = load(e, qp);
      for (int j = 0; j < npe; ++j) {
        const int row = dofs.index(0, conn[j]);
        if (row < 0) continue;
        rhs[row] += qp.weight * f * qp.shape[j];
      }
    }
  }
  Eigen::SparseMatrix<double> K(ni, ni);
  K.setFromTriplets(trips.begin(), trips.end());
  K.makeCompressed();
  const Eigen::VectorXd z = sparse_solve(K, rhs);
  DiscreteField out = DiscreteField::zeros(mesh, true);
  for (int node : dofs.interior_nodes())
    out.values()[node] = z[dofs.index(0, node)];
  return out;
}

void check_nonnegative(std::vector<DiscreteField>& fields, double floor) {
  for (auto& f : fields) {
    const double mn = f.values().minCoeff();
    if (mn < floor)
      throw NegativeSolution("converged field dips to " + std::to_string(mn) +
                             " below the admissible floor");
    if (mn < 0) f.values() = f.values().cwiseMax(0.0);
  }
}

// Shared driver: Newton, then Picard rescue + Newton once more.
CoreOutcome solve_with_fallback(const GalerkinProblem& prob,
                                std::vector<DiscreteField> init,
                                const NewtonOptions& opts) {
  CoreOutcome out = newton_core(prob, std::move(init), opts);
  if (out.status == CoreStatus::Converged || !opts.allow_picard) return out;
  const int first_iters = out.report.iterations;
  std::vector<DiscreteField> rescued =
      picard_sweeps(prob, std::move(out.fields), opts.picard_iters);
  CoreOutcome again = newton_core(prob, std::move(rescued), opts);
  again.report.used_picard = true;
  again.report.iterations += first_iters;
  return again;
}

DiscreteField truncate_field(const DiscreteField& f, double cap) {
  DiscreteField out = f;
  out.values() = out.values().cwiseMin(cap);
  return out;
}

}  // namespace

RegularizedSolution newton_solve(const SystemSpec& spec,
                                 const RegularizationParams& params,
                                 const DiscreteField& u0,
                                 const DiscreteField& v0,
                                 const NewtonOptions& opts) {
  if (!u0.zero_trace() || !v0.zero_trace())
    throw InvalidSpec("newton_solve requires zero-trace initial fields");
  const bool has_singular = spec.alpha[0] > 0 || spec.alpha[1] > 0 ||
                            spec.beta[0] > 0 || spec.beta[1] > 0;
  if (params.eps <= 0 && has_singular)
    throw InvalidSpec("eps must be positive while singular exponents are present");
  if (params.delta < 0) throw InvalidSpec("delta must be nonnegative");
  if (params.delta > 0 && spec.structure == StructureClass::Cooperative)
    throw InvalidSpec("a positive delta contradicts the cooperative structure class");

  const double eta = params.eta < 0 ? default_grad_smoothing(*spec.mesh)
                                    : params.eta;
  const GalerkinProblem prob =
      make_system_problem(spec, params.eps, params.delta, eta);
  CoreOutcome out = solve_with_fallback(prob, {u0, v0}, opts);
  if (out.status != CoreStatus::Converged)
    throw NoConvergence("newton iteration failed at eps = " +
                        std::to_string(params.eps) + " (residual " +
                        std::to_string(out.report.residual_norm) + ")");
  check_nonnegative(out.fields, opts.negative_floor);
  return RegularizedSolution{std::move(out.fields[0]), std::move(out.fields[1]),
                             out.report, params.eps, params.delta};
}

AprioriBound compute_r0(const SystemSpec& spec,
                        const RegularizationParams& params) {
  const Mesh& mesh = *spec.mesh;
  const NFunction& nf = spec.nf;
  const double ell = nf.ell();
  const double omega = mesh.measure();
  const double dbar = mesh.diameter();
  // Unit-function conjugate norm and the two embedding factors.
  const double norm_one_conj = 1.0 / nf.conjugate_inverse(1.0 / omega);
  const double c_l1 = 2.0 * norm_one_conj * 2.0 * dbar;   // L1 <- gradient norm
  const double c_lell =
      std::pow(omega + 1.0 / nf.Phi(1.0), 1.0 / ell) * 2.0 * dbar;

  for (int i = 0; i < 2; ++i)
    if (spec.gamma[i] + spec.sigma[i] >= ell - 1.0)
      throw ExponentOutOfRange(
          "power exponents make the coercivity polynomial eventually "
          "nonpositive (gamma + sigma must stay below l - 1)");

  AprioriBound out;
  out.lead = ell / std::pow(2.0, ell);
  out.eps_independent = true;

  for (int i = 0; i < 2; ++i) {
    const double a_inf = spec.a[i].values().maxCoeff();
    const double b_inf = spec.b[i].values().maxCoeff();
    const double s = spec.gamma[i] + spec.sigma[i] + 1.0;
    out.s[i] = s;

    // Singular term paired with the unknown itself.
    if (spec.beta[i] == 0 && spec.alpha[i] <= 1.0) {
      // eps-free branch: (|u|+eps)^(-alpha) |u| <= 1 + |u|.
      double a_l1 = 0;
      std::array<Mesh::QuadPoint, 3> qps;
      for (int e = 0; e < mesh.element_count(); ++e) {
        mesh.quadrature(e, qps);
        for (const auto& qp : qps) a_l1 += qp.weight * spec.a[i].at(e, qp);
      }
      out.c4 += a_l1;
      out.c1 += a_inf * c_l1;
    } else {
      out.eps_independent = false;
      out.c1 += a_inf * c_l1 /
                std::pow(params.eps, spec.alpha[i] + spec.beta[i]);
    }

    // Power term: integral (w + delta)^s with w <= u + v.
    const double split = std::pow(2.0, s - 1.0);
    const double grow = b_inf * split * std::pow(omega, 1.0 - s / ell) *
                        std::pow(c_lell, s);
    if (i == 0)
      out.c2 = grow;
    else
      out.c3 = grow;
    if (params.delta > 0)
      out.c4 += b_inf * split * std::pow(params.delta, s) * omega;
  }

  const auto P = [&](double r) {
    return out.lead * std::pow(r, ell) - out.c1 * r -
           out.c2 * std::pow(r, out.s[0]) - out.c3 * std::pow(r, out.s[1]) -
           out.c4;
  };
  double lo = 2.0, hi = 2.0;
  if (P(hi) > 0) {
    out.r0 = 2.0;
    return out;
  }
  int guard = 0;
  while (P(hi) <= 0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 2000)
      throw BracketFailure("gradient bound polynomial never became positive");
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (P(mid) > 0 ? hi : lo) = mid;
  }
  out.r0 = hi;
  return out;
}

std::array<DiscreteField, 2> zero_state_seed(const SystemSpec& spec, double eps,
                                             double delta) {
  const auto mesh = spec.mesh;
  DiscreteField u = linear_seed(mesh, [&](int e, const Mesh::QuadPoint& qp) {
    return rhs_point(spec, 1, spec.a[0].at(e, qp), spec.b[0].at(e, qp), 0.0,
                     0.0, eps, delta, false)
        .f;
  });
  DiscreteField v = linear_seed(mesh, [&](int e, const Mesh::QuadPoint& qp) {
    return rhs_point(spec, 2, spec.a[1].at(e, qp), spec.b[1].at(e, qp), 0.0,
                     0.0, eps, delta, false)
        .f;
  });
  return {std::move(u), std::move(v)};
}

DiscreteField solve_scalar(const NFunction& nf,
                           const std::shared_ptr<const Mesh>& mesh,
                           const Expression& f, const NewtonOptions& opts,
                           double eta) {
  GalerkinProblem prob;
  prob.mesh = mesh;
  prob.nf = nf;
  prob.n_fields = 1;
  prob.eta = eta < 0 ? default_grad_smoothing(*mesh) : eta;
  const Mesh* m = mesh.get();
  prob.source = [&f, m](int, int e, const Mesh::QuadPoint& qp,
                        const std::array<double, 2>& st, bool deriv) {
    (void)e;
    EvalContext ctx;
    ctx.x = qp.x[0];
    ctx.y = qp.x[1];
    ctx.d = m->boundary_distance(qp.x);
    ctx.t = st[0];
    PointSource out;
    out.f = f.eval(ctx);
    if (deriv) {
      const double h = 1e-6 * (1.0 + std::abs(st[0]));
      ctx.t = st[0] + h;
      const double fp = f.eval(ctx);
      ctx.t = st[0] - h;
      const double fm = f.eval(ctx);
      out.df[0] = (fp - fm) / (2.0 * h);
    }
    return out;
  };
  DiscreteField seed = linear_seed(mesh, [&f, m](int, const Mesh::QuadPoint& qp) {
    EvalContext ctx;
    ctx.x = qp.x[0];
    ctx.y = qp.x[1];
    ctx.d = m->boundary_distance(qp.x);
    ctx.t = 0;
    return f.eval(ctx);
  });
  CoreOutcome out = solve_with_fallback(prob, {std::move(seed)}, opts);
  if (out.status != CoreStatus::Converged)
    throw NoConvergence("scalar reaction solve failed (residual " +
                        std::to_string(out.report.residual_norm) + ")");
  return std::move(out.fields[0]);
}

ScalarMin minimize_g(double beta, double sigma) {
  const auto g = [&](double t) {
    return 1.0 / (std::pow(t, beta) + 1.0) + std::pow(t, sigma);
  };
  // Coarse scan over t = 0 and a log grid up to the cap.
  const int n = 2000;
  std::vector<double> ts;
  ts.reserve(n + 1);
  ts.push_back(0.0);
  const double lo = 1e-9, hi = 1e6;
  for (int k = 0; k < n; ++k)
    ts.push_back(lo * std::pow(hi / lo, double(k) / (n - 1)));
  int best = 0;
  double bestv = g(ts[0]);
  for (int k = 1; k < int(ts.size()); ++k) {
    const double v = g(ts[k]);
    if (v < bestv) {
      bestv = v;
      best = k;
    }
  }
  double a = ts[std::max(0, best - 1)];
  double b = ts[std::min(int(ts.size()) - 1, best + 1)];
  // Golden-section refinement.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 120 && b - a > 1e-14 * (1.0 + b); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = g(x2);
    }
  }
  // Local quadratic polish around the golden-section bracket.
  double xm = 0.5 * (a + b);
  double fm = g(xm);
  for (int it = 0; it < 8; ++it) {
    const double hstep = std::max(1e-9, 1e-6 * xm);
    const double xl = std::max(0.0, xm - hstep), xr = xm + hstep;
    const double fl = g(xl), fr = g(xr);
    const double denom = fl - 2.0 * fm + fr;
    if (denom <= 0) break;
    const double shift = 0.5 * hstep * (fl - fr) / denom;
    const double xn = std::clamp(xm + shift, 0.0, 1e6);
    const double fn = g(xn);
    if (fn >= fm) break;
    xm = xn;
    fm = fn;
  }
  ScalarMin out;
  out.t = xm;
  out.value = fm;
  if (bestv < out.value) {
    out.t = ts[best];
    out.value = bestv;
  }
  return out;
}

double fit_lower_bound(const DiscreteField& u, const DiscreteField& d) {
  const Mesh& mesh = u.mesh();
  double c = std::numeric_limits<double>::infinity();
  for (int node : mesh.interior_nodes()) {
    if (d[node] <= 0)
      throw InvalidSpec("distance field must be positive at interior nodes");
    c = std::min(c, u[node] / d[node]);
  }
  return c;
}

BarrierSolution solve_barrier(const SystemSpec& spec, BarrierKind kind,
                              int which, const NewtonOptions& opts) {
  if (which != 1 && which != 2)
    throw InvalidSpec("solve_barrier: which must be 1 or 2");
  const int i = which - 1;
  const auto mesh = spec.mesh;
  const DiscreteField a1 = truncate_field(spec.a[i], 1.0);
  const DiscreteField b1 = truncate_field(spec.b[i], 1.0);

  GalerkinProblem prob;
  prob.mesh = mesh;
  prob.nf = spec.nf;
  prob.n_fields = 1;
  prob.eta = default_grad_smoothing(*mesh);

  BarrierSolution sol{DiscreteField::zeros(mesh, true), NewtonReport{}, kind,
                      which, 0.0};
  const double alpha = spec.alpha[i];
  const double gamma = spec.gamma[i];

  if (kind == BarrierKind::SingularScalar) {
    prob.source = [&a1, alpha](int, int e, const Mesh::QuadPoint& qp,
                               const std::array<double, 2>& st,
                               bool deriv) {
      const double denom = std::abs(st[0]) + 1.0;
      const double f = a1.at(e, qp) * std::pow(denom, -alpha);
      PointSource out;
      out.f = f;
      if (deriv) out.df[0] = -alpha * f * (st[0] >= 0 ? 1.0 : -1.0) / denom;
      return out;
    };
    if (a1.values().maxCoeff() <= 0)
      throw ZeroBarrier("singular barrier load vanishes identically");
    DiscreteField seed = linear_seed(
        mesh, [&a1](int e, const Mesh::QuadPoint& qp) { return a1.at(e, qp); });
    CoreOutcome out = solve_with_fallback(prob, {std::move(seed)}, opts);
    if (out.status != CoreStatus::Converged)
      throw NoConvergence("singular barrier solve failed");
    check_nonnegative(out.fields, opts.negative_floor);
    sol.w = std::move(out.fields[0]);
    sol.report = out.report;
    return sol;
  }

  if (kind == BarrierKind::PowerScalar) {
    if (b1.values().maxCoeff() <= 0)
      throw ZeroBarrier("power barrier load vanishes identically");
    prob.source = [&b1, gamma](int, int e, const Mesh::QuadPoint& qp,
                               const std::array<double, 2>& st, bool deriv) {
      const double pw = std::max(st[0], 0.0);
      const double f = b1.at(e, qp) * std::pow(pw, gamma);
      PointSource out;
      out.f = f;
      if (deriv && gamma > 0 && pw > 0) out.df[0] = gamma * f / pw;
      return out;
    };
    DiscreteField w = linear_seed(
        mesh, [&b1](int e, const Mesh::QuadPoint& qp) { return b1.at(e, qp); });
    const double seed_scale = w.values().maxCoeff();
    int total_iters = 0;
    for (int attempt = 0; attempt < 2; ++attempt) {
      // Outer fixed-point sweeps with the source frozen at the previous
      // iterate; each inner problem is a plain kernel solve.
      DiscreteField cur = w;
      bool collapsed = false;
      for (int k = 0; k < 12; ++k) {
        const DiscreteField frozen = cur;
        GalerkinProblem inner = prob;
        inner.source = [&b1, gamma, &frozen](int, int e,
                                             const Mesh::QuadPoint& qp,
                                             const std::array<double, 2>&,
                                             bool) {
          const double pw = std::max(frozen.at(e, qp), 0.0);
          PointSource out;
          out.f = b1.at(e, qp) * std::pow(pw, gamma);
          return out;
        };
        CoreOutcome step = solve_with_fallback(inner, {cur}, opts);
        if (step.status != CoreStatus::Converged)
          throw NoConvergence("power barrier inner solve failed");
        total_iters += step.report.iterations;
        cur = std::move(step.fields[0]);
        if (cur.values().maxCoeff() < 1e-12 * std::max(seed_scale, 1e-300)) {
          collapsed = true;
          break;
        }
      }
      if (!collapsed) {
        CoreOutcome polish = solve_with_fallback(prob, {cur}, opts);
        if (polish.status != CoreStatus::Converged)
          throw NoConvergence("power barrier polish failed");
        polish.report.iterations += total_iters;
        if (polish.fields[0].values().maxCoeff() >
            1e-12 * std::max(seed_scale, 1e-300)) {
          check_nonnegative(polish.fields, opts.negative_floor);
          sol.w = std::move(polish.fields[0]);
          sol.report = polish.report;
          return sol;
        }
      }
      // Retry once from a larger positive seed.
      w.values() *= 10.0;
    }
    throw ZeroBarrier("power barrier iteration collapsed to zero");
  }

  // MixedScalar
  const ScalarMin gmin = minimize_g(spec.beta[i], spec.sigma[i]);
  sol.g_value = gmin.value;
  DiscreteField h = DiscreteField::zeros(mesh, false);
  for (int k = 0; k < mesh->node_count(); ++k)
    h.values()[k] = std::min({spec.a[i][k], spec.b[i][k], 1.0});
  if (h.values().maxCoeff() * gmin.value <= 0)
    throw ZeroBarrier("mixed barrier load vanishes identically");
  prob.source = [&h, g = gmin.value](int, int e, const Mesh::QuadPoint& qp,
                                     const std::array<double, 2>&, bool) {
    PointSource out;
    out.f = h.at(e, qp) * g;
    return out;
  };
  DiscreteField seed = linear_seed(
      mesh, [&h, g = gmin.value](int e, const Mesh::QuadPoint& qp) {
        return h.at(e, qp) * g;
      });
  CoreOutcome out = solve_with_fallback(prob, {std::move(seed)}, opts);
  if (out.status != CoreStatus::Converged)
    throw NoConvergence("mixed barrier solve failed");
  check_nonnegative(out.fields, opts.negative_floor);
  sol.w = std::move(out.fields[0]);
  sol.report = out.report;
  return sol;
}

ContinuationReport continuation_solve(const SystemSpec& spec,
                                      const ContinuationOptions& opts) {
  std::vector<double> schedule = opts.schedule;
  if (schedule.empty())
    for (int k = 1; k <= 8; ++k) schedule.push_back(std::pow(0.5, k));
  for (size_t k = 0; k < schedule.size(); ++k) {
    if (schedule[k] <= 0)
      throw InvalidSpec("continuation schedule entries must be positive");
    if (k > 0 && schedule[k] >= schedule[k - 1])
      throw InvalidSpec("continuation schedule must decrease");
  }
  if (spec.structure == StructureClass::General)
    throw InvalidSpec(
        "continuation needs one of the structure classes (cooperative, "
        "noncooperative, or mixed) to choose its delta policy");
  const bool delta_active = spec.structure == StructureClass::NonCooperative ||
                            spec.structure == StructureClass::Mixed;
  const auto mesh = spec.mesh;
  const DiscreteField dist = distance_function(mesh);
  const double eta =
      opts.eta < 0 ? default_grad_smoothing(*mesh) : opts.eta;

  ContinuationReport rep{{},
                         DiscreteField::zeros(mesh, true),
                         DiscreteField::zeros(mesh, true),
                         std::nullopt,
                         std::nullopt,
                         false};

  // Barriers (level-1 truncation, stage independent).
  if (opts.compute_barriers && spec.structure != StructureClass::General) {
    BarrierKind kind = BarrierKind::SingularScalar;
    if (spec.structure == StructureClass::NonCooperative)
      kind = BarrierKind::PowerScalar;
    else if (spec.structure == StructureClass::Mixed)
      kind = BarrierKind::MixedScalar;
    try {
      rep.barrier_u = solve_barrier(spec, kind, 1, opts.newton).w;
      rep.barrier_v = solve_barrier(spec, kind, 2, opts.newton).w;
    } catch (const ZeroBarrier&) {
      rep.barrier_u.reset();
      rep.barrier_v.reset();
    }
  }

  // Warm start: barriers when available, else the linear solve with the
  // zero-state right-hand side of the first stage.
  DiscreteField u = DiscreteField::zeros(mesh, true);
  DiscreteField v = DiscreteField::zeros(mesh, true);
  const double eps0 = schedule.front();
  const double delta0 = delta_active ? eps0 : 0.0;
  if (rep.barrier_u && rep.barrier_v) {
    u = *rep.barrier_u;
    v = *rep.barrier_v;
  } else {
    const double cap0 = 1.0 / eps0;
    SystemSpec s0 = spec;
    for (int i = 0; i < 2; ++i) {
      s0.a[i] = truncate_field(spec.a[i], cap0);
      s0.b[i] = truncate_field(spec.b[i], cap0);
    }
    auto seeds = zero_state_seed(s0, eps0, delta0);
    u = std::move(seeds[0]);
    v = std::move(seeds[1]);
  }

  for (size_t k = 0; k < schedule.size(); ++k) {
    const double eps = schedule[k];
    const double delta = delta_active ? eps : 0.0;
    const double cap = 1.0 / eps;
    SystemSpec stage_spec = spec;
    for (int i = 0; i < 2; ++i) {
      stage_spec.a[i] = truncate_field(spec.a[i], cap);
      stage_spec.b[i] = truncate_field(spec.b[i], cap);
    }
    RegularizationParams params{eps, delta, eta};
    RegularizedSolution sol = newton_solve(stage_spec, params, u, v, opts.newton);

    StageRecord rec;
    rec.stage = int(k);
    rec.eps = eps;
    rec.delta = delta;
    rec.truncation = cap;
    rec.norm_u = luxemburg_norm(spec.nf, sol.u, NormKind::Gradient);
    rec.norm_v = luxemburg_norm(spec.nf, sol.v, NormKind::Gradient);
    rec.residual = sol.report.residual_norm;
    rec.newton_iters = sol.report.iterations;
    rec.used_picard = sol.report.used_picard;

    DiscreteField du(mesh, sol.u.values() - u.values(), true);
    DiscreteField dv(mesh, sol.v.values() - v.values(), true);
    rec.increment = std::max(luxemburg_norm(spec.nf, du, NormKind::Function),
                             luxemburg_norm(spec.nf, dv, NormKind::Function));
    rec.c_lower = std::min(fit_lower_bound(sol.u, dist),
                           fit_lower_bound(sol.v, dist));
    const AprioriBound bound = compute_r0(stage_spec, params);
    rec.r0 = bound.r0;
    rec.r0_eps_independent = bound.eps_independent;

    if (rep.barrier_u && rep.barrier_v) {
      const double shift = spec.structure == StructureClass::Mixed ? 0.0 : eps;
      double margin = std::numeric_limits<double>::infinity();
      for (int n = 0; n < mesh->node_count(); ++n) {
        margin = std::min(margin, sol.u[n] + shift - (*rep.barrier_u)[n]);
        margin = std::min(margin, sol.v[n] + shift - (*rep.barrier_v)[n]);
      }
      rec.barrier_margin = margin;
    } else {
      rec.barrier_margin = std::numeric_limits<double>::quiet_NaN();
    }

    // Flux pairing of the previous stage against this one: at this point u, v
    // still hold the previous stage's solution.
    if (!rep.stages.empty()) {
      double pairing = 0;
      for (int e = 0; e < mesh->element_count(); ++e) {
        const double area = mesh->element_measure(e);
        const auto gu_prev = u.gradient(e);
        const auto gv_prev = v.gradient(e);
        const auto gu_cur = sol.u.gradient(e);
        const auto gv_cur = sol.v.gradient(e);
        const auto Au = flux(spec.nf, gu_prev, eta);
        const auto Av = flux(spec.nf, gv_prev, eta);
        pairing += area * (Au[0] * (gu_prev[0] - gu_cur[0]) +
                           Au[1] * (gu_prev[1] - gu_cur[1]) +
                           Av[0] * (gv_prev[0] - gv_cur[0]) +
                           Av[1] * (gv_prev[1] - gv_cur[1]));
      }
      rep.stages.back().pairing = pairing;
    }

    u = sol.u;
    v = sol.v;
    rep.stages.push_back(rec);

    if (k > 0 && rec.increment < opts.increment_tol) {
      rep.stopped_early = true;
      break;
    }
  }

  rep.u = u;
  rep.v = v;
  return rep;
}

}  // namespace philap
