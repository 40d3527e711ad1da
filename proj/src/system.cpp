#include "philap/system.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace philap {

namespace {

constexpr double kStrict = 1e-14;  // threshold realizing strict inequalities

std::string eq_tag(int i) { return i == 0 ? "equation 1" : "equation 2"; }

}  // namespace

const char* structure_name(StructureClass s) {
  switch (s) {
    case StructureClass::General: return "general";
    case StructureClass::Cooperative: return "cooperative";
    case StructureClass::NonCooperative: return "non-cooperative";
    case StructureClass::Mixed: return "mixed";
  }
  return "?";
}

DiscreteField sample_coefficient(std::shared_ptr<const Mesh> mesh,
                                 const Expression& expr) {
  Eigen::VectorXd v(mesh->node_count());
  for (int i = 0; i < mesh->node_count(); ++i) {
    const auto& x = mesh->node(i);
    EvalContext ctx;
    ctx.x = x[0];
    ctx.y = x[1];
    ctx.d = mesh->boundary_distance(x);
    v[i] = expr.eval(ctx);
  }
  return DiscreteField(std::move(mesh), std::move(v), false);
}

bool ValidationReport::solver_ok() const {
  for (const auto& c : checks) {
    if (c.level == CheckLevel::Solver && c.status == CheckStatus::Fail) {
      return false;
    }
  }
  return true;
}

bool ValidationReport::theorem_ok() const {
  for (const auto& c : checks) {
    if (c.status == CheckStatus::Fail) return false;
  }
  return true;
}

namespace {

void check_coefficients(const SystemSpec& spec, ValidationReport& rep) {
  ValidationCheck nonneg{"coefficient-nonnegativity", CheckLevel::Solver,
                         CheckStatus::Pass, ""};
  ValidationCheck positivity{"coefficient-positivity", CheckLevel::Solver,
                             CheckStatus::Pass, ""};
  for (int i = 0; i < 2; ++i) {
    const double amin = spec.a[i].values().minCoeff();
    const double bmin = spec.b[i].values().minCoeff();
    if (amin < 0 || bmin < 0) {
      nonneg.status = CheckStatus::Fail;
      std::ostringstream os;
      os << eq_tag(i) << ": min a = " << amin << ", min b = " << bmin;
      nonneg.detail = os.str();
    }
  }
  for (int node : spec.mesh->interior_nodes()) {
    const double s0 = spec.a[0][node] + spec.b[0][node];
    const double s1 = spec.a[1][node] + spec.b[1][node];
    if (s0 <= kStrict || s1 <= kStrict) {
      positivity.status = CheckStatus::Fail;
      std::ostringstream os;
      os << "a_i + b_i vanishes at interior node " << node;
      positivity.detail = os.str();
      break;
    }
  }
  rep.checks.push_back(std::move(nonneg));
  rep.checks.push_back(std::move(positivity));
}

void check_exponents(const SystemSpec& spec, ValidationReport& rep) {
  const double ell = spec.nf.ell();
  ValidationCheck nonneg{"exponent-nonnegativity", CheckLevel::Solver,
                         CheckStatus::Pass, ""};
  ValidationCheck sum{"power-exponent-sum", CheckLevel::Solver,
                      CheckStatus::Pass, ""};
  ValidationCheck strict{"power-exponent-sum-strict", CheckLevel::Theorem,
                         CheckStatus::Pass, ""};
  for (int i = 0; i < 2; ++i) {
    if (spec.alpha[i] < 0 || spec.beta[i] < 0 || spec.gamma[i] < 0 ||
        spec.sigma[i] < 0) {
      nonneg.status = CheckStatus::Fail;
      nonneg.detail = eq_tag(i) + ": negative exponent";
    }
    const double s = spec.gamma[i] + spec.sigma[i];
    if (!(s < ell - 1.0 - kStrict)) {
      sum.status = CheckStatus::Fail;
      std::ostringstream os;
      os << eq_tag(i) << ": gamma + sigma = " << s << " must stay below ell-1 = "
         << ell - 1.0;
      sum.detail = os.str();
    }
    if (!(s > kStrict)) {
      strict.status = CheckStatus::Fail;
      std::ostringstream os;
      os << eq_tag(i) << ": sigma + gamma = " << s
         << " fails strict positivity";
      strict.detail = os.str();
    }
  }
  rep.checks.push_back(std::move(nonneg));
  rep.checks.push_back(std::move(sum));
  rep.checks.push_back(std::move(strict));
}

void check_integrability_exponent(const SystemSpec& spec,
                                  ValidationReport& rep) {
  const double ell = spec.nf.ell();
  ValidationCheck q{"integrability-exponent", CheckLevel::Theorem,
                    CheckStatus::Pass, ""};
  for (int i = 0; i < 2; ++i) {
    const bool b_present = spec.b[i].values().maxCoeff() > 0;
    if (!b_present) continue;
    const double denom = ell - spec.sigma[i] - spec.gamma[i] - 1.0;
    if (denom <= kStrict) {
      q.status = CheckStatus::Unverified;
      q.detail = eq_tag(i) + ": bound undefined, exponent sum reaches ell-1";
      continue;
    }
    const double required = ell / denom;
    if (!spec.q[i].has_value()) {
      if (q.status == CheckStatus::Pass) {
        q.status = CheckStatus::Unverified;
        std::ostringstream os;
        os << eq_tag(i) << ": q not supplied (requires q >= " << required
           << ")";
        q.detail = os.str();
      }
      continue;
    }
    if (*spec.q[i] < required - kStrict) {
      q.status = CheckStatus::Fail;
      std::ostringstream os;
      os << eq_tag(i) << ": q = " << *spec.q[i] << " below required "
         << required;
      q.detail = os.str();
    }
  }
  rep.checks.push_back(std::move(q));
}

void check_structure(const SystemSpec& spec, ValidationReport& rep) {
  ValidationCheck st{"structure-consistency", CheckLevel::Theorem,
                     CheckStatus::Pass, structure_name(spec.structure)};
  auto fail = [&](const std::string& why) {
    st.status = CheckStatus::Fail;
    st.detail = std::string(structure_name(spec.structure)) + ": " + why;
  };
  switch (spec.structure) {
    case StructureClass::General:
      break;
    case StructureClass::Cooperative:
      if (spec.beta[0] > 0 || spec.beta[1] > 0) {
        fail("beta must vanish");
      }
      break;
    case StructureClass::NonCooperative:
      if (spec.sigma[0] > 0 || spec.sigma[1] > 0) {
        fail("sigma must vanish");
      }
      break;
    case StructureClass::Mixed: {
      if (spec.alpha[0] > 0 || spec.alpha[1] > 0 || spec.gamma[0] > 0 ||
          spec.gamma[1] > 0) {
        fail("alpha and gamma must vanish");
        break;
      }
      for (int i = 0; i < 2 && st.status == CheckStatus::Pass; ++i) {
        for (int node : spec.mesh->interior_nodes()) {
          if (std::min(spec.a[i][node], spec.b[i][node]) <= kStrict) {
            std::ostringstream os;
            os << "min(a, b) vanishes at interior node " << node << " in "
               << eq_tag(i);
            fail(os.str());
            break;
          }
        }
      }
      break;
    }
  }
  rep.checks.push_back(std::move(st));
}

void check_singular_weight(const SystemSpec& spec, ValidationReport& rep) {
  ValidationCheck w{"singular-weight-integrability", CheckLevel::Theorem,
                    CheckStatus::Pass, ""};
  if (!spec.psi.has_value()) {
    w.status = CheckStatus::Unverified;
    w.detail = "psi not supplied; hypothesis unverified";
    rep.checks.push_back(std::move(w));
    return;
  }
  // quadrature estimate of the conjugate modular of a_i d^{-(alpha_i+beta_i)}
  const Mesh& mesh = *spec.mesh;
  std::array<Mesh::QuadPoint, 3> qp;
  for (int i = 0; i < 2; ++i) {
    const double expo = spec.alpha[i] + spec.beta[i];
    double total = 0;
    bool unbounded = false;
    for (int e = 0; e < mesh.element_count() && !unbounded; ++e) {
      mesh.quadrature(e, qp);
      for (const auto& q : qp) {
        const double aval = std::max(0.0, spec.a[i].at(e, q));
        if (aval == 0) continue;
        const double d = mesh.boundary_distance(q.x);
        if (d <= 0) {
          unbounded = true;
          break;
        }
        total += q.weight * spec.psi->conjugate(aval * std::pow(d, -expo));
        if (!std::isfinite(total)) {
          unbounded = true;
          break;
        }
      }
    }
    if (unbounded || total > 1e12) {
      w.status = CheckStatus::Fail;
      std::ostringstream os;
      os << eq_tag(i) << ": conjugate modular of the singular weight ";
      if (unbounded) {
        os << "is unbounded";
      } else {
        os << "= " << total << " exceeds 1e12";
      }
      w.detail = os.str();
    }
  }
  rep.checks.push_back(std::move(w));
}

void check_growth_comparison(const SystemSpec& spec, ValidationReport& rep) {
  ValidationCheck g{"growth-comparison", CheckLevel::Theorem, CheckStatus::Pass,
                    ""};
  if (!spec.psi.has_value() || spec.n_dim <= 1) {
    g.status = CheckStatus::Unverified;
    g.detail = spec.psi.has_value() ? "ambient dimension not supplied"
                                    : "psi not supplied; hypothesis unverified";
    rep.checks.push_back(std::move(g));
    return;
  }
  if (spec.nf.m() >= spec.n_dim) {
    g.status = CheckStatus::Fail;
    std::ostringstream os;
    os << "Sobolev conjugate undefined: m = " << spec.nf.m()
       << " >= dimension " << spec.n_dim;
    g.detail = os.str();
    rep.checks.push_back(std::move(g));
    return;
  }
  // Psi must grow strictly slower than the Sobolev conjugate: the ratio
  // Psi(lambda t)/Phi_*(t) has to decay along a geometric grid for every
  // lambda.  Parametrizing t through the defining integral avoids inverting
  // it: at t = G(tau) the Sobolev conjugate equals tau.
  const double expo = (spec.n_dim + 1.0) / spec.n_dim;
  auto G = [&](double tau) {
    const int n = 4000;  // graded geometric rule, fine near zero
    double total = 0;
    double prev = tau * 1e-12;
    const double ratio = std::pow(1e12, 1.0 / n);
    for (int k = 0; k < n; ++k) {
      const double next = prev * ratio;
      const double mid = 0.5 * (prev + next);
      total += spec.nf.Phi_inverse(mid) * std::pow(mid, -expo) * (next - prev);
      prev = next;
    }
    return total;
  };
  for (double lambda : {1.0, 2.0, 4.0}) {
    double prev_ratio = std::numeric_limits<double>::infinity();
    double first = 0, last = 0;
    bool monotone = true;
    for (int k = 1; k <= 5; ++k) {
      const double tau = std::pow(10.0, k);
      const double t = G(tau);
      const double ratio = spec.psi->Phi(lambda * t) / tau;
      if (k == 1) first = ratio;
      last = ratio;
      if (ratio > prev_ratio * (1.0 + 1e-9)) monotone = false;
      prev_ratio = ratio;
    }
    if (!monotone || !(last < 1e-2 * std::max(first, 1e-300))) {
      g.status = CheckStatus::Fail;
      std::ostringstream os;
      os << "ratio psi(" << lambda << " t)/sobolev-conjugate does not decay ("
         << first << " -> " << last << ")";
      g.detail = os.str();
      break;
    }
  }
  rep.checks.push_back(std::move(g));
}

}  // namespace

ValidationReport validate(const SystemSpec& spec) {
  ValidationReport rep;
  check_coefficients(spec, rep);
  check_exponents(spec, rep);
  check_integrability_exponent(spec, rep);
  check_structure(spec, rep);
  check_singular_weight(spec, rep);
  check_growth_comparison(spec, rep);
  return rep;
}

RhsValue rhs_point(const SystemSpec& spec, int which, double a_val,
                   double b_val, double u, double v, double eps, double delta,
                   bool with_derivatives) {
  const int i = which - 1;
  const double own = (which == 1) ? u : v;
  const double other = (which == 1) ? v : u;

  const double au = std::abs(own) + eps;
  const double av = std::abs(other) + eps;
  double sing = 0;
  if (a_val != 0) {
    sing = a_val * std::pow(au, -spec.alpha[i]) * std::pow(av, -spec.beta[i]);
  }
  const double pu = std::max(own, 0.0) + delta;
  const double pv = std::max(other, 0.0) + delta;
  double powr = 0;
  if (b_val != 0) {
    powr = b_val * std::pow(pu, spec.gamma[i]) * std::pow(pv, spec.sigma[i]);
  }

  RhsValue out;
  out.f = sing + powr;
  if (!with_derivatives) return out;

  const double s_own = (own >= 0) ? 1.0 : -1.0;
  const double s_other = (other >= 0) ? 1.0 : -1.0;
  // positive-part indicator; at zero take the right-hand derivative
  const double i_own = (own >= 0) ? 1.0 : 0.0;
  const double i_other = (other >= 0) ? 1.0 : 0.0;

  double d_own = -spec.alpha[i] * sing * s_own / au;
  double d_other = -spec.beta[i] * sing * s_other / av;
  if (b_val != 0) {
    if (spec.gamma[i] > 0 && pu > 0) {
      d_own += spec.gamma[i] * powr / pu * i_own;
    }
    if (spec.sigma[i] > 0 && pv > 0) {
      d_other += spec.sigma[i] * powr / pv * i_other;
    }
  }
  if (which == 1) {
    out.df_du = d_own;
    out.df_dv = d_other;
  } else {
    out.df_dv = d_own;
    out.df_du = d_other;
  }
  return out;
}

double rhs_eval(const SystemSpec& spec, const DiscreteField& u,
                const DiscreteField& v, double eps, double delta, int node,
                int which) {
  if (which != 1 && which != 2) throw InvalidSpec("equation index must be 1 or 2");
  const int i = which - 1;
  if (eps <= 0 && (spec.alpha[i] > 0 || spec.beta[i] > 0)) {
    throw InvalidSpec("rhs evaluation needs eps > 0 while singular exponents are present");
  }
  if (delta < 0) throw InvalidSpec("delta must be nonnegative");
  return rhs_point(spec, which, spec.a[i][node], spec.b[i][node], u[node],
                   v[node], eps, delta, false)
      .f;
}

}  // namespace philap
