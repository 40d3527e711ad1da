#include "philap/orlicz.hpp"

#include <cmath>
#include <sstream>

namespace philap {

namespace {

double apply(const NFunction& nf, bool conjugate, double t) {
  return conjugate ? nf.conjugate(t) : nf.Phi(t);
}

double scaled_modular(const NFunction& nf, const DiscreteField& u,
                      NormKind kind, bool conjugate, double inv_lambda) {
  const Mesh& mesh = u.mesh();
  double total = 0;
  if (kind == NormKind::Gradient) {
    for (int e = 0; e < mesh.element_count(); ++e) {
      const auto g = u.gradient(e);
      const double mag = std::hypot(g[0], g[1]);
      total += apply(nf, conjugate, mag * inv_lambda) * mesh.element_measure(e);
    }
    return total;
  }
  std::array<Mesh::QuadPoint, 3> qp;
  for (int e = 0; e < mesh.element_count(); ++e) {
    mesh.quadrature(e, qp);
    for (const auto& q : qp) {
      total += q.weight * apply(nf, conjugate, std::abs(u.at(e, q)) * inv_lambda);
    }
  }
  return total;
}

}  // namespace

double modular(const NFunction& nf, const DiscreteField& u, NormKind kind,
               bool conjugate) {
  return scaled_modular(nf, u, kind, conjugate, 1.0);
}

double luxemburg_norm(const NFunction& nf, const DiscreteField& u,
                      NormKind kind, bool conjugate, double rel_tol) {
  double scale = 0;
  if (kind == NormKind::Gradient) {
    const Mesh& mesh = u.mesh();
    for (int e = 0; e < mesh.element_count(); ++e) {
      const auto g = u.gradient(e);
      scale = std::max(scale, std::hypot(g[0], g[1]));
    }
  } else {
    scale = u.values().cwiseAbs().maxCoeff();
  }
  if (scale == 0.0) return 0.0;

  // modular(u/lambda) is strictly decreasing in lambda; bracket the unit level
  auto level = [&](double lambda) {
    return scaled_modular(nf, u, kind, conjugate, 1.0 / lambda);
  };
  double lo = scale, hi = scale;
  if (level(scale) > 1.0) {
    int guard = 0;
    do {
      hi *= 2.0;
      if (++guard > 4000) throw BracketFailure("Luxemburg norm: no upper bracket");
    } while (level(hi) > 1.0);
    lo = hi * 0.5;
  } else {
    int guard = 0;
    do {
      lo *= 0.5;
      if (++guard > 4000) throw BracketFailure("Luxemburg norm: no lower bracket");
    } while (level(lo) <= 1.0);
    hi = lo * 2.0;
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (level(mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double integrate_product(const DiscreteField& u, const DiscreteField& v) {
  if (u.mesh_ptr() != v.mesh_ptr()) {
    throw InvalidSpec("product integral needs fields on the same mesh");
  }
  const Mesh& mesh = u.mesh();
  std::array<Mesh::QuadPoint, 3> qp;
  double total = 0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    mesh.quadrature(e, qp);
    for (const auto& q : qp) {
      total += q.weight * u.at(e, q) * v.at(e, q);
    }
  }
  return total;
}

PoincareReport check_poincare(const NFunction& nf, const DiscreteField& u) {
  if (!u.zero_trace()) {
    throw InvalidSpec("Poincare check needs a zero-trace field");
  }
  const double dbar = u.mesh().diameter();
  PoincareReport rep;
  rep.lhs = modular(nf, u, NormKind::Function);
  // modular of 2*diam*|grad u|, elementwise constant
  const Mesh& mesh = u.mesh();
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto g = u.gradient(e);
    rep.rhs += nf.Phi(2.0 * dbar * std::hypot(g[0], g[1])) *
               mesh.element_measure(e);
  }
  rep.slack = rep.rhs - rep.lhs;
  const double scale = std::max({rep.lhs, rep.rhs, 1e-300});
  if (rep.slack < -1e-9 * scale) {
    std::ostringstream os;
    os << "modular Poincare inequality violated: lhs = " << rep.lhs
       << ", rhs = " << rep.rhs;
    throw BoundViolation(os.str());
  }
  return rep;
}

}  // namespace philap
