#include "philap/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "philap/assembly.hpp"

namespace philap {

std::optional<double> j_functional(const NFunction& nf,
                                   const DiscreteField& w) {
  const Mesh& mesh = w.mesh();
  const double inv_l = 1.0 / nf.ell();
  Eigen::VectorXd roots(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) {
    if (w[i] < 0) return std::nullopt;
    roots[i] = std::pow(w[i], inv_l);
  }
  const DiscreteField z(w.mesh_ptr(), std::move(roots), false);
  double total = 0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto g = z.gradient(e);
    const double gm = std::sqrt(g[0] * g[0] + g[1] * g[1]);
    total += mesh.element_measure(e) * nf.Phi(gm);
  }
  if (!std::isfinite(total)) return std::nullopt;
  return total;
}

ConvexityReport check_phi_power_convexity(const NFunction& nf,
                                          const std::vector<double>& grid,
                                          int midpoint_samples, unsigned seed) {
  if (grid.size() < 3)
    throw InvalidSpec("convexity probe needs at least three grid points");
  std::vector<double> ts = grid;
  std::sort(ts.begin(), ts.end());
  if (ts.front() < 0)
    throw InvalidSpec("convexity probe grid must be nonnegative");
  const double inv_l = 1.0 / nf.ell();
  const auto h = [&](double t) { return nf.Phi(std::pow(t, inv_l)); };

  ConvexityReport rep;
  const double slack = 1e-9;
  for (size_t i = 0; i + 2 < ts.size(); ++i) {
    const double t0 = ts[i], t1 = ts[i + 1], t2 = ts[i + 2];
    if (t1 - t0 <= 0 || t2 - t1 <= 0) continue;
    const double h0 = h(t0), h1 = h(t1), h2 = h(t2);
    const double dd =
        2.0 * ((h2 - h1) / (t2 - t1) - (h1 - h0) / (t1 - t0)) / (t2 - t0);
    const double scale =
        (std::abs(h0) + std::abs(h1) + std::abs(h2)) /
            ((t2 - t0) * (t2 - t0)) +
        1.0;
    const double normalized = dd / scale;
    rep.worst_second_difference =
        std::min(rep.worst_second_difference, normalized);
    if (normalized < -slack) ++rep.violations;
    ++rep.checked;
  }

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(ts.front(), ts.back());
  for (int s = 0; s < midpoint_samples; ++s) {
    const double a = dist(rng), b = dist(rng);
    const double ha = h(a), hb = h(b), hm = h(0.5 * (a + b));
    const double margin =
        (0.5 * (ha + hb) - hm) / (1.0 + std::abs(ha) + std::abs(hb));
    rep.worst_midpoint_margin = std::min(rep.worst_midpoint_margin, margin);
    if (margin < -slack) ++rep.violations;
    ++rep.checked;
  }
  return rep;
}

const char* verdict_name(ComparisonVerdict v) {
  switch (v) {
    case ComparisonVerdict::Pass:
      return "pass";
    case ComparisonVerdict::HypothesisFailure:
      return "hypothesis-failure";
    case ComparisonVerdict::OrderingViolation:
      return "ordering-violation";
  }
  return "unknown";
}

namespace {

// Interior residual entries of -div(phi(|grad u|) grad u) - f(x, u) in weak
// form, with the raw (eta = 0) flux.
Eigen::VectorXd scalar_residual(const NFunction& nf, const Expression& f,
                                const DiscreteField& u) {
  const Mesh& mesh = u.mesh();
  const DofMap dofs(mesh, 1);
  Eigen::VectorXd R = Eigen::VectorXd::Zero(dofs.size());
  const int npe = mesh.nodes_per_element();
  std::array<Mesh::QuadPoint, 3> qps;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& conn = mesh.element(e);
    const double area = mesh.element_measure(e);
    const auto A = flux(nf, u.gradient(e), 0.0);
    mesh.quadrature(e, qps);
    for (int j = 0; j < npe; ++j) {
      const int row = dofs.index(0, conn[j]);
      if (row < 0) continue;
      const auto& gj = mesh.basis_gradient(e, j);
      R[row] += area * (A[0] * gj[0] + A[1] * gj[1]);
    }
    for (const auto& qp : qps) {
      EvalContext ctx;
      ctx.x = qp.x[0];
      ctx.y = qp.x[1];
      ctx.d = mesh.boundary_distance(qp.x);
      ctx.t = u.at(e, qp);
      const double fv = f.eval(ctx);
      for (int j = 0; j < npe; ++j) {
        const int row = dofs.index(0, conn[j]);
        if (row < 0) continue;
        R[row] -= qp.weight * fv * qp.shape[j];
      }
    }
  }
  return R;
}

}  // namespace

ComparisonReport comparison_test(const ComparisonInstance& inst) {
  const Mesh& mesh = *inst.mesh;
  const NFunction& nf = inst.nf;
  const DiscreteField& u1 = inst.u1;
  const DiscreteField& u2 = inst.u2;
  ComparisonReport rep;

  // One-sided residual checks.
  const Eigen::VectorXd r1 = scalar_residual(nf, inst.f, u1);
  const Eigen::VectorXd r2 = scalar_residual(nf, inst.f, u2);
  rep.worst_sub_residual = r1.size() ? r1.maxCoeff() : 0.0;
  rep.worst_super_residual = r2.size() ? r2.minCoeff() : 0.0;
  rep.sub_ok = rep.worst_sub_residual <= inst.residual_tol;
  rep.super_ok = rep.worst_super_residual >= -inst.residual_tol;

  // Strict decay of f(x, t) / t^(l-1) in t, probed on quadrature points.
  const double ell = nf.ell();
  double tmax = 10.0 * std::max(1e-6, u2.values().maxCoeff());
  const int nt = 200;
  std::vector<double> tgrid(nt);
  for (int k = 0; k < nt; ++k)
    tgrid[k] = 1e-6 * std::pow(tmax / 1e-6, double(k) / (nt - 1));
  rep.monotone_ok = true;
  std::array<Mesh::QuadPoint, 3> qps;
  const int stride = std::max(1, mesh.element_count() / 1500);
  for (int e = 0; e < mesh.element_count() && rep.monotone_ok; e += stride) {
    mesh.quadrature(e, qps);
    for (const auto& qp : qps) {
      EvalContext ctx;
      ctx.x = qp.x[0];
      ctx.y = qp.x[1];
      ctx.d = mesh.boundary_distance(qp.x);
      double prev = 0;
      bool have_prev = false;
      for (double t : tgrid) {
        ctx.t = t;
        const double ratio = inst.f.eval(ctx) / std::pow(t, ell - 1.0);
        if (have_prev) {
          const double need = std::max(1e-14, 1e-10 * std::abs(prev));
          if (ratio >= prev - need) {
            rep.monotone_ok = false;
            break;
          }
        }
        prev = ratio;
        have_prev = true;
      }
      if (!rep.monotone_ok) break;
    }
  }

  // Boundary comparison and global ordering margin.
  rep.boundary_ok = true;
  rep.ordering_margin = std::numeric_limits<double>::infinity();
  for (int n = 0; n < mesh.node_count(); ++n) {
    const double gap = u2[n] - u1[n];
    if (mesh.is_boundary(n) && gap < -inst.ordering_tol)
      rep.boundary_ok = false;
    if (gap < rep.ordering_margin) {
      rep.ordering_margin = gap;
      rep.worst_node = n;
    }
  }

  // Interior ratio bound.
  rep.ratio_bound = 0;
  for (int n : mesh.interior_nodes()) {
    if (u2[n] < inst.positivity_floor) {
      if (u1[n] > inst.positivity_floor)
        rep.ratio_bound = std::numeric_limits<double>::infinity();
      continue;
    }
    rep.ratio_bound = std::max(rep.ratio_bound, u1[n] / u2[n]);
  }

  // Flux pairing against the truncated test pair
  //   psi_i = (u1^l - u2^l)+ / u_i^(l-1),
  // zeroed below the positivity floor and on the boundary.
  Eigen::VectorXd psi1 = Eigen::VectorXd::Zero(mesh.node_count());
  Eigen::VectorXd psi2 = Eigen::VectorXd::Zero(mesh.node_count());
  for (int n : mesh.interior_nodes()) {
    const double gap =
        std::pow(std::max(u1[n], 0.0), ell) - std::pow(std::max(u2[n], 0.0), ell);
    if (gap <= 0) continue;
    if (u1[n] >= inst.positivity_floor)
      psi1[n] = gap / std::pow(u1[n], ell - 1.0);
    else
      ++rep.excluded_nodes;
    if (u2[n] >= inst.positivity_floor)
      psi2[n] = gap / std::pow(u2[n], ell - 1.0);
    else
      ++rep.excluded_nodes;
  }
  const DiscreteField p1(inst.mesh, std::move(psi1), true);
  const DiscreteField p2(inst.mesh, std::move(psi2), true);
  double pairing = 0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double area = mesh.element_measure(e);
    const auto A1 = flux(nf, u1.gradient(e), 0.0);
    const auto A2 = flux(nf, u2.gradient(e), 0.0);
    const auto g1 = p1.gradient(e);
    const auto g2 = p2.gradient(e);
    pairing += area * (A1[0] * g1[0] + A1[1] * g1[1] - A2[0] * g2[0] -
                       A2[1] * g2[1]);
  }
  rep.pairing = pairing;

  // Verdict: hypothesis failures dominate ordering violations.
  if (!rep.sub_ok)
    rep.detail = "subsolution residual exceeds tolerance";
  else if (!rep.super_ok)
    rep.detail = "supersolution residual dips below tolerance";
  else if (!rep.monotone_ok)
    rep.detail = "f(x,t)/t^(l-1) is not strictly decreasing";
  else if (!rep.boundary_ok)
    rep.detail = "boundary ordering fails";
  if (!rep.detail.empty()) {
    rep.verdict = ComparisonVerdict::HypothesisFailure;
    return rep;
  }
  if (rep.ordering_margin < -inst.ordering_tol) {
    rep.verdict = ComparisonVerdict::OrderingViolation;
    rep.detail = "ordering fails at node " + std::to_string(rep.worst_node);
    return rep;
  }
  rep.verdict = ComparisonVerdict::Pass;
  rep.detail = "ordered";
  return rep;
}

}  // namespace philap
