#include "philap/assembly.hpp"

#include <cmath>
#include <vector>

namespace philap {

double default_grad_smoothing(const Mesh& mesh) {
  return 1e-8 / mesh.diameter();
}

std::array<double, 2> flux(const NFunction& nf, const std::array<double, 2>& g,
                           double eta) {
  const double s2 = g[0] * g[0] + g[1] * g[1];
  if (eta == 0 && s2 == 0) return {0.0, 0.0};
  const double s = std::sqrt(s2 + eta * eta);
  const double p = nf.kernel().phi(s);
  return {p * g[0], p * g[1]};
}

FluxJacobian flux_jacobian(const NFunction& nf, const std::array<double, 2>& g,
                           double eta) {
  const double s2 = g[0] * g[0] + g[1] * g[1];
  const double s = std::sqrt(s2 + eta * eta);
  FluxJacobian out;
  if (s == 0) return out;  // only reachable with eta = 0 and g = 0
  const double p = nf.kernel().phi(s);
  // d/dg [phi(|g|_eta) g] = phi I + (phi'(s)/s) g g^T, with s = |g|_eta.
  const double q = nf.kernel().phi_prime(s) / s;
  out.a11 = p + q * g[0] * g[0];
  out.a12 = q * g[0] * g[1];
  out.a22 = p + q * g[1] * g[1];
  return out;
}

DofMap::DofMap(const Mesh& mesh, int fields) : fields_(fields) {
  if (fields < 1 || fields > 2)
    throw InvalidSpec("DofMap supports one or two fields");
  interior_ = mesh.interior_nodes();
  node_to_interior_.assign(mesh.node_count(), -1);
  for (int k = 0; k < int(interior_.size()); ++k)
    node_to_interior_[interior_[k]] = k;
}

void assemble(const GalerkinProblem& prob, const DofMap& dofs,
              const std::vector<DiscreteField>& states,
              Eigen::VectorXd* residual, Eigen::SparseMatrix<double>* jacobian) {
  const Mesh& mesh = *prob.mesh;
  const int nf_fields = prob.n_fields;
  if (int(states.size()) != nf_fields)
    throw InvalidSpec("assemble: state count does not match problem fields");
  const int n = dofs.size();
  if (residual) residual->setZero(n);
  std::vector<Eigen::Triplet<double>> trips;
  if (jacobian) trips.reserve(size_t(mesh.element_count()) * 9 * nf_fields * 2);

  const int npe = mesh.nodes_per_element();
  std::array<Mesh::QuadPoint, 3> qps;
  const bool want_jac = jacobian != nullptr;

  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& conn = mesh.element(e);
    const double area = mesh.element_measure(e);
    mesh.quadrature(e, qps);

    for (int f = 0; f < nf_fields; ++f) {
      // Diffusion part: A(grad u_f) . grad shape_j integrated over e.
      const auto g = states[f].gradient(e);
      const auto A = flux(prob.nf, g, prob.eta);
      FluxJacobian dA;
      if (want_jac) dA = flux_jacobian(prob.nf, g, prob.eta);
      for (int j = 0; j < npe; ++j) {
        const int row = dofs.index(f, conn[j]);
        if (row < 0) continue;
        const auto& gj = mesh.basis_gradient(e, j);
        if (residual)
          (*residual)[row] += area * (A[0] * gj[0] + A[1] * gj[1]);
        if (want_jac) {
          for (int k = 0; k < npe; ++k) {
            const int col = dofs.index(f, conn[k]);
            if (col < 0) continue;
            const auto& gk = mesh.basis_gradient(e, k);
            const double val =
                area * (gj[0] * (dA.a11 * gk[0] + dA.a12 * gk[1]) +
                        gj[1] * (dA.a12 * gk[0] + dA.a22 * gk[1]));
            trips.emplace_back(row, col, val);
          }
        }
      }
    }

    // Source part, quadrature over e.
    for (const auto& qp : qps) {
      std::array<double, 2> state{0.0, 0.0};
      for (int f = 0; f < nf_fields; ++f) state[f] = states[f].at(e, qp);
      for (int f = 0; f < nf_fields; ++f) {
        const PointSource src = prob.source(f, e, qp, state, want_jac);
        for (int j = 0; j < npe; ++j) {
          const int row = dofs.index(f, conn[j]);
          if (row < 0) continue;
          if (residual) (*residual)[row] -= qp.weight * src.f * qp.shape[j];
          if (want_jac) {
            for (int k = 0; k < nf_fields; ++k) {
              if (src.df[k] == 0) continue;
              for (int l = 0; l < npe; ++l) {
                const int col = dofs.index(k, conn[l]);
                if (col < 0) continue;
                trips.emplace_back(row, col,
                                   -qp.weight * src.df[k] * qp.shape[j] *
                                       qp.shape[l]);
              }
            }
          }
        }
      }
    }
  }

  if (jacobian) {
    jacobian->resize(n, n);
    jacobian->setFromTriplets(trips.begin(), trips.end());
    jacobian->makeCompressed();
  }
}

GalerkinProblem make_system_problem(const SystemSpec& spec, double eps,
                                    double delta, double eta) {
  GalerkinProblem prob;
  prob.mesh = spec.mesh;
  prob.nf = spec.nf;
  prob.n_fields = 2;
  prob.eta = eta < 0 ? default_grad_smoothing(*spec.mesh) : eta;
  prob.source = [&spec, eps, delta](int field, int e,
                                    const Mesh::QuadPoint& qp,
                                    const std::array<double, 2>& state,
                                    bool with_derivatives) {
    const int which = field + 1;
    const double a_val = spec.a[field].at(e, qp);
    const double b_val = spec.b[field].at(e, qp);
    const RhsValue r = rhs_point(spec, which, a_val, b_val, state[0], state[1],
                                 eps, delta, with_derivatives);
    PointSource out;
    out.f = r.f;
    if (with_derivatives) {
      out.df[0] = r.df_du;
      out.df[1] = r.df_dv;
    }
    return out;
  };
  return prob;
}

Eigen::VectorXd assemble_residual(const SystemSpec& spec,
                                  const DiscreteField& u,
                                  const DiscreteField& v, double eps,
                                  double delta, double eta) {
  const GalerkinProblem prob = make_system_problem(spec, eps, delta, eta);
  const DofMap dofs(*spec.mesh, 2);
  Eigen::VectorXd r;
  assemble(prob, dofs, {u, v}, &r, nullptr);
  return r;
}

Eigen::SparseMatrix<double> assemble_jacobian(const SystemSpec& spec,
                                              const DiscreteField& u,
                                              const DiscreteField& v,
                                              double eps, double delta,
                                              double eta) {
  const GalerkinProblem prob = make_system_problem(spec, eps, delta, eta);
  const DofMap dofs(*spec.mesh, 2);
  Eigen::SparseMatrix<double> jac;
  assemble(prob, dofs, {u, v}, nullptr, &jac);
  return jac;
}

}  // namespace philap
