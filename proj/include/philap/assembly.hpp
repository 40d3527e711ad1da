// Galerkin assembly for -div(phi(|grad u|) grad u) = source(x, u, v) with
// zero Dirichlet data, for one or two unknown fields on a shared mesh.
// The kernel argument is smoothed as |g|_eta = sqrt(|g|^2 + eta^2) inside phi
// only, so the flux of a flat field is exactly zero.
#pragma once

#include <Eigen/Sparse>
#include <functional>

#include "philap/mesh.hpp"
#include "philap/nfunction.hpp"
#include "philap/system.hpp"

namespace philap {

// Default kernel smoothing: 1e-8 / diameter.
double default_grad_smoothing(const Mesh& mesh);

// Regularized flux A(g) = phi(|g|_eta) g.  With eta = 0 the flux of g = 0 is
// zero regardless of phi's behaviour at the origin.
std::array<double, 2> flux(const NFunction& nf, const std::array<double, 2>& g,
                           double eta);

// Symmetric derivative dA/dg.
struct FluxJacobian {
  double a11 = 0, a12 = 0, a22 = 0;
};
FluxJacobian flux_jacobian(const NFunction& nf, const std::array<double, 2>& g,
                           double eta);

// Interior-node indexing for stacked unknowns.
class DofMap {
 public:
  DofMap(const Mesh& mesh, int fields);
  int fields() const { return fields_; }
  int interior_count() const { return int(interior_.size()); }
  int size() const { return fields_ * interior_count(); }
  const std::vector<int>& interior_nodes() const { return interior_; }
  // dof index of (field, node); -1 at boundary nodes
  int index(int field, int node) const {
    const int k = node_to_interior_[node];
    return k < 0 ? -1 : field * interior_count() + k;
  }

 private:
  int fields_;
  std::vector<int> interior_;
  std::vector<int> node_to_interior_;
};

// Source value and partials with respect to each unknown at a point.
struct PointSource {
  double f = 0;
  std::array<double, 2> df{0.0, 0.0};
};

// Generic weak-form problem: callbacks evaluate the source of each field at a
// quadrature point given the interpolated states.
struct GalerkinProblem {
  std::shared_ptr<const Mesh> mesh;
  NFunction nf;
  int n_fields = 1;
  double eta = 0;
  std::function<PointSource(int field, int elem, const Mesh::QuadPoint& qp,
                            const std::array<double, 2>& state,
                            bool with_derivatives)>
      source;
};

// Residual over interior dofs, and optionally the sparse Jacobian.
void assemble(const GalerkinProblem& prob, const DofMap& dofs,
              const std::vector<DiscreteField>& states, Eigen::VectorXd* residual,
              Eigen::SparseMatrix<double>* jacobian);

// Weak form of the full two-field system at regularization (eps, delta):
// residual entries are indexed interior-u first, then interior-v.
Eigen::VectorXd assemble_residual(const SystemSpec& spec,
                                  const DiscreteField& u,
                                  const DiscreteField& v, double eps,
                                  double delta, double eta = -1);
Eigen::SparseMatrix<double> assemble_jacobian(const SystemSpec& spec,
                                              const DiscreteField& u,
                                              const DiscreteField& v,
                                              double eps, double delta,
                                              double eta = -1);

// The two-field problem bundle used by the solver.
GalerkinProblem make_system_problem(const SystemSpec& spec, double eps,
                                    double delta, double eta);

}  // namespace philap
