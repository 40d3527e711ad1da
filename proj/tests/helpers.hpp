// Shared construction helpers for the test suites.
#pragma once

#include <array>
#include <memory>
#include <random>
#include <string>
#include <utility>

#include "philap/system.hpp"

namespace testutil {

// Builds a two-field spec with both equations sharing the same coefficient
// expressions (in x, y, d).
inline philap::SystemSpec make_spec(const philap::NFunction& nf,
                                    std::shared_ptr<const philap::Mesh> mesh,
                                    const std::string& a_expr,
                                    const std::string& b_expr,
                                    std::array<double, 2> alpha,
                                    std::array<double, 2> beta,
                                    std::array<double, 2> gamma,
                                    std::array<double, 2> sigma,
                                    philap::StructureClass structure) {
  using philap::Expression;
  auto a = philap::sample_coefficient(mesh, Expression::parse(a_expr));
  auto b = philap::sample_coefficient(mesh, Expression::parse(b_expr));
  return philap::SystemSpec{nf,    mesh,  {a, a}, {b, b},       alpha, beta,
                            gamma, sigma, {},     std::nullopt, 0.0,
                            structure};
}

// Random zero-trace field with nodal values in [-amp, amp].
inline philap::DiscreteField random_zero_trace(
    std::shared_ptr<const philap::Mesh> mesh, std::mt19937& rng,
    double amp = 1.0) {
  std::uniform_real_distribution<double> unif(-amp, amp);
  Eigen::VectorXd v(mesh->node_count());
  for (int i = 0; i < mesh->node_count(); ++i) {
    v[i] = mesh->is_boundary(i) ? 0.0 : unif(rng);
  }
  return philap::DiscreteField(std::move(mesh), std::move(v), true);
}

inline double max_nodal_diff(const philap::DiscreteField& u,
                             const philap::DiscreteField& v) {
  return (u.values() - v.values()).cwiseAbs().maxCoeff();
}

}  // namespace testutil
