// Acceptance gate: end-to-end checks of the library's guarantees, one
// [PASS]/[FAIL] line per criterion, nonzero exit if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "philap/assembly.hpp"
#include "philap/comparison.hpp"
#include "philap/orlicz.hpp"
#include "philap/solver.hpp"

using namespace philap;
using testutil::make_spec;

namespace {

struct Outcome {
  int number = 0;
  std::string name;
  bool pass = false;
  std::string note;
  double seconds = 0;
  double budget = 0;  // 0 = untimed
};

std::vector<Outcome> g_results;

// stage records harvested from every continuation run, for the radius gate
struct StampedStage {
  std::string run;
  StageRecord st;
};
std::vector<StampedStage> g_stages;

template <class Body>
void criterion(int number, const std::string& name, double budget,
               Body&& body) {
  Outcome out;
  out.number = number;
  out.name = name;
  out.budget = budget;
  const auto start = std::chrono::steady_clock::now();
  try {
    std::ostringstream note;
    out.pass = body(note);
    out.note = note.str();
  } catch (const std::exception& e) {
    out.pass = false;
    out.note = std::string("exception: ") + e.what();
  }
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (out.budget > 0 && out.seconds >= out.budget) {
    out.pass = false;
    out.note += (out.note.empty() ? "" : "; ") + std::string("over budget");
  }
  g_results.push_back(std::move(out));
}

std::vector<double> node_xs(const Mesh& mesh) {
  std::vector<double> xs(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) xs[i] = mesh.node(i)[0];
  return xs;
}

// ---------------------------------------------------------------- criterion 1
bool kernel_audit(std::ostringstream& note) {
  struct Expect {
    PhiKernel kernel;
    double ell, m;
  };
  std::vector<Expect> cases;
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    cases.push_back({PhiKernel::power(p), p, p});
  }
  cases.push_back({PhiKernel::sum_powers({2, 3}), 2.0, 3.0});
  cases.push_back({PhiKernel::sum_powers({1.5, 2.5}), 1.5, 2.5});

  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> e(-3.0, 3.0);
  std::vector<ZetaSample> samples(10000);
  for (auto& z : samples) {
    z.rho = std::pow(10.0, e(rng));
    z.t = std::pow(10.0, e(rng));
  }

  double worst_exponent = 0, worst_roundtrip = 0, worst_oracle = 0;
  for (const auto& c : cases) {
    const NFunction nf = build_nfunction(c.kernel);
    worst_exponent = std::max(
        {worst_exponent, std::abs(nf.ell() - c.ell), std::abs(nf.m() - c.m)});
    for (int k = 0; k < 50; ++k) {
      const double t = 1e-3 * std::pow(1e6, k / 49.0);
      const double s = nf.Phi_prime(t);
      const double back = t * s - nf.conjugate(s);
      const double scale = std::max(1.0, nf.Phi(t));
      worst_roundtrip =
          std::max(worst_roundtrip, std::abs(back - nf.Phi(t)) / scale);
      const double direct = oracle::legendre_conjugate(
          [&](double u) { return nf.Phi(u); }, t);
      const double cscale = std::max(1.0, std::abs(direct));
      worst_oracle =
          std::max(worst_oracle, std::abs(nf.conjugate(t) - direct) / cscale);
    }
    const ZetaReport zr = check_zeta_bounds(nf, samples);  // throws on violation
    if (zr.checked != int(samples.size())) {
      note << "zeta sweep incomplete";
      return false;
    }
  }
  note << "exponent err " << worst_exponent << ", biconjugation "
       << worst_roundtrip << ", vs oracle " << worst_oracle;
  return worst_exponent <= 1e-6 && worst_roundtrip <= 1e-8 &&
         worst_oracle <= 1e-8;
}

// ---------------------------------------------------------------- criterion 2
bool norm_audit(std::ostringstream& note) {
  std::mt19937 rng(77);
  const NFunction kernels[2] = {build_nfunction(PhiKernel::power(2.0)),
                                build_nfunction(PhiKernel::sum_powers({2, 3}))};
  auto mesh = Mesh::interval(0.0, 1.0, 50);
  double worst_unit = 0, worst_homog = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const NFunction& nf = kernels[trial % 2];
    const NormKind kind =
        (trial / 2) % 2 == 0 ? NormKind::Function : NormKind::Gradient;
    const DiscreteField u = testutil::random_zero_trace(mesh, rng, 2.0);
    const double norm = luxemburg_norm(nf, u, kind, false, 1e-13);
    if (!(norm > 0)) {
      note << "vanishing norm on a random field";
      return false;
    }
    const DiscreteField unit(mesh, u.values() / norm, true);
    worst_unit = std::max(worst_unit, std::abs(modular(nf, unit, kind) - 1.0));
    const double c = 3.7;
    const DiscreteField cu(mesh, c * u.values(), true);
    const double nc = luxemburg_norm(nf, cu, kind, false, 1e-13);
    worst_homog = std::max(
        worst_homog, std::abs(nc - c * norm) / std::max(1.0, c * norm));
    check_poincare(kernels[trial % 2], u);  // throws on violation
  }
  note << "unit-ball err " << worst_unit << ", homogeneity err " << worst_homog;
  return worst_unit <= 1e-8 && worst_homog <= 1e-12;
}

// ---------------------------------------------------------------- criterion 3
bool linear_sanity(std::ostringstream& note) {
  const NFunction nf = build_nfunction(PhiKernel::power(2.0));
  auto mesh = Mesh::interval(0.0, 1.0, 200);
  const DiscreteField u = solve_scalar(nf, mesh, Expression::parse("1"));
  double worst = 0;
  for (int i = 0; i < mesh->node_count(); ++i) {
    const double x = mesh->node(i)[0];
    worst = std::max(worst, std::abs(u[i] - 0.5 * x * (1.0 - x)));
  }
  note << "nodal err " << worst;
  return worst <= 1e-6;
}

// ---------------------------------------------------------------- criterion 4
bool singular_oracle(std::ostringstream& note) {
  const NFunction nf = build_nfunction(PhiKernel::power(2.0));
  auto mesh = Mesh::interval(0.0, 1.0, 800);
  const auto xs = node_xs(*mesh);
  const SystemSpec spec = make_spec(nf, mesh, "1", "0", {1, 1}, {0, 0}, {0, 0},
                                    {0, 0}, StructureClass::Cooperative);
  double worst_all = 0;
  for (double eps : {1.0, 0.1, 0.01}) {
    const auto seed = zero_state_seed(spec, eps, 0.0);
    const RegularizedSolution sol =
        newton_solve(spec, {eps, 0.0, -1}, seed[0], seed[1]);
    if (!sol.report.converged) {
      note << "no convergence at eps " << eps;
      return false;
    }
    const auto exact = oracle::shoot_dirichlet(
        [eps](double y) { return 1.0 / (y + eps); }, xs);
    double worst = 0;
    for (int i = 0; i < mesh->node_count(); ++i) {
      worst = std::max(worst, std::abs(sol.u[i] - exact[i]));
    }
    note << "eps " << eps << ": " << worst << "  ";
    worst_all = std::max(worst_all, worst);
  }
  return worst_all <= 1e-5;
}

// --------------------------------------------------- criteria 6 and 8 driver
struct DeskCase {
  std::string name;
  StructureClass structure;
  std::array<double, 2> alpha, beta, gamma, sigma;
};

const std::vector<DeskCase>& desk_cases() {
  static const std::vector<DeskCase> cases = {
      {"cooperative", StructureClass::Cooperative,
       {0.02, 0.02}, {0, 0}, {0, 0}, {0.1, 0.1}},
      {"non-cooperative", StructureClass::NonCooperative,
       {0.5, 0.5}, {0.5, 0.5}, {0.3, 0.3}, {0, 0}},
      {"mixed", StructureClass::Mixed,
       {0, 0}, {1.0, 1.0}, {0, 0}, {0.5, 0.5}},
  };
  return cases;
}

ContinuationReport run_desk(const DeskCase& c, double p, int cells,
                            const std::string& label) {
  const NFunction nf = build_nfunction(PhiKernel::power(p));
  auto mesh = Mesh::interval(0.0, 1.0, cells);
  const SystemSpec spec = make_spec(nf, mesh, "1", "1", c.alpha, c.beta,
                                    c.gamma, c.sigma, c.structure);
  ContinuationOptions opts;
  opts.increment_tol = 0.0;  // run the full schedule
  ContinuationReport rep = continuation_solve(spec, opts);
  for (const auto& st : rep.stages) g_stages.push_back({label, st});
  return rep;
}

// ---------------------------------------------------------------- criterion 6
bool lower_bound_certificate(std::ostringstream& note) {
  bool ok = true;
  double worst_c = 1e300, worst_margin = 1e300;
  for (const DeskCase& c : desk_cases()) {
    for (double p : {2.0, 3.0}) {
      const std::string label = c.name + " p=" + std::to_string(int(p));
      const ContinuationReport rep = run_desk(c, p, 100, label);
      for (const auto& st : rep.stages) {
        worst_c = std::min(worst_c, st.c_lower);
        worst_margin = std::min(worst_margin, st.barrier_margin);
        if (!(st.c_lower > 0.01) || !(st.barrier_margin >= -1e-8)) {
          ok = false;
          note << label << " stage " << st.stage << " C " << st.c_lower
               << " margin " << st.barrier_margin << "; ";
        }
      }
    }
  }
  note << "min C " << worst_c << ", min barrier margin " << worst_margin;
  return ok;
}

// ---------------------------------------------------------------- criterion 7
bool comparison_suite(std::ostringstream& note) {
  int passes = 0, flagged = 0;
  double worst_margin = 1e300;
  const std::vector<std::string> fs = {"1", "1/(1+t)", "1/(2+t)", "2/(1+t)",
                                       "1/(1+t^2)"};
  const std::vector<std::pair<double, double>> setups = {
      {1.5, 1.5}, {2.0, 1.2}, {2.0, 1.5}, {3.0, 1.5}, {3.0, 1.2}};
  for (const auto& [p, scale] : setups) {
    const NFunction nf = build_nfunction(PhiKernel::power(p));
    auto mesh = Mesh::interval(0.0, 1.0, 80);
    for (const auto& f : fs) {
      const DiscreteField u1 = solve_scalar(nf, mesh, Expression::parse(f));
      const DiscreteField u2(mesh, scale * u1.values(), true);
      const ComparisonInstance inst{
          nf, mesh, u1, u2, Expression::parse(f), 1e-7, 1e-10, 1e-13, f};
      const ComparisonReport rep = comparison_test(inst);
      if (rep.verdict == ComparisonVerdict::Pass &&
          rep.ordering_margin >= -1e-10) {
        ++passes;
        worst_margin = std::min(worst_margin, rep.ordering_margin);
      } else {
        note << "p " << p << " scale " << scale << " f " << f << " -> "
             << verdict_name(rep.verdict) << "; ";
      }
    }
  }

  // five deliberately broken instances must be flagged as hypothesis failures
  {
    const NFunction nf = build_nfunction(PhiKernel::power(2.0));
    auto mesh = Mesh::interval(0.0, 1.0, 80);
    const DiscreteField u =
        solve_scalar(nf, mesh, Expression::parse("1/(1+t)"));
    const auto scaled = [&](double c) {
      return DiscreteField(mesh, c * u.values(), true);
    };
    std::vector<ComparisonInstance> bad;
    // increasing reaction ratio
    bad.push_back({nf, mesh, u, scaled(2.0), Expression::parse("t^2"), 1e6,
                   1e-10, 1e-13, "ratio-increasing"});
    // constant reaction ratio (not strictly decreasing)
    bad.push_back({nf, mesh, u, scaled(2.0), Expression::parse("t"), 1e6,
                   1e-10, 1e-13, "ratio-constant"});
    // doubled field overshoots the load: subsolution residual fails
    bad.push_back({nf, mesh, scaled(2.0), scaled(3.0),
                   Expression::parse("1/(1+t)"), 1e-7, 1e-10, 1e-13,
                   "sub-violation"});
    // halved field undershoots: supersolution residual fails
    bad.push_back({nf, mesh, scaled(0.4), scaled(0.5),
                   Expression::parse("1/(1+t)"), 1e-7, 1e-10, 1e-13,
                   "super-violation"});
    // boundary ordering broken at one node
    Eigen::VectorXd bumped = u.values();
    bumped[0] += 0.05;
    bad.push_back({nf, mesh, DiscreteField(mesh, bumped, false), scaled(1.5),
                   Expression::parse("1/(1+t)"), 1e-7, 1e-10, 1e-13,
                   "boundary-violation"});
    for (const auto& inst : bad) {
      const ComparisonReport rep = comparison_test(inst);
      if (rep.verdict == ComparisonVerdict::HypothesisFailure) {
        ++flagged;
      } else {
        note << inst.id << " -> " << verdict_name(rep.verdict) << "; ";
      }
    }
  }

  // convexity of t -> Phi(t^{1/l}) for every builtin kernel
  int violations = 0;
  std::vector<double> grid(100);
  for (int i = 0; i < 100; ++i) grid[i] = 1e-3 * std::pow(1e6, i / 99.0);
  for (const NFunction& nf :
       {build_nfunction(PhiKernel::power(1.5)),
        build_nfunction(PhiKernel::power(2.0)),
        build_nfunction(PhiKernel::power(3.0)),
        build_nfunction(PhiKernel::power(4.0)),
        build_nfunction(PhiKernel::sum_powers({2, 3})),
        build_nfunction(PhiKernel::sum_powers({1.5, 2.5}))}) {
    violations += check_phi_power_convexity(nf, grid).violations;
  }

  note << passes << "/25 pass, " << flagged << "/5 flagged, worst margin "
       << worst_margin << ", convexity violations " << violations;
  return passes == 25 && flagged == 5 && violations == 0;
}

// ---------------------------------------------------------------- criterion 8
bool continuation_stability(std::ostringstream& note) {
  const DeskCase& coop = desk_cases()[0];
  std::vector<ContinuationReport> reports;
  for (int cells : {100, 200, 400}) {
    reports.push_back(run_desk(coop, 2.0, cells,
                               "stability n=" + std::to_string(cells)));
  }
  bool ok = true;
  // Cauchy increments on the working mesh: decay along the schedule, final
  // below 1e-4
  const auto& stages = reports[1].stages;
  for (size_t k = 2; k < stages.size(); ++k) {
    if (stages[k].increment > stages[k - 1].increment * 1.05 + 1e-12) {
      ok = false;
      note << "increment rose at stage " << stages[k].stage << "; ";
    }
  }
  if (!(stages.back().increment < 1e-4)) {
    ok = false;
    note << "final increment " << stages.back().increment << "; ";
  }
  // mesh-refinement study: consecutive levels agree at shared nodes
  double worst_diff = 0;
  for (int level = 0; level + 1 < int(reports.size()); ++level) {
    const DiscreteField& coarse = reports[level].u;
    const DiscreteField& fine = reports[level + 1].u;
    for (int i = 0; i < coarse.mesh().node_count(); ++i) {
      worst_diff = std::max(worst_diff, std::abs(coarse[i] - fine[2 * i]));
    }
    const DiscreteField& coarse_v = reports[level].v;
    const DiscreteField& fine_v = reports[level + 1].v;
    for (int i = 0; i < coarse_v.mesh().node_count(); ++i) {
      worst_diff =
          std::max(worst_diff, std::abs(coarse_v[i] - fine_v[2 * i]));
    }
  }
  note << "final increment " << stages.back().increment << ", mesh-study diff "
       << worst_diff;
  return ok && worst_diff <= 5e-4;
}

// ---------------------------------------------------------------- criterion 9
bool jacobian_consistency(std::ostringstream& note) {
  auto mesh = Mesh::interval(0.0, 1.0, 12);
  std::mt19937 rng(501);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto tent = [&](double kink, double amp) {
    Eigen::VectorXd v(mesh->node_count());
    for (int i = 0; i < mesh->node_count(); ++i) {
      const double x = mesh->node(i)[0];
      v[i] = amp * std::min(x / kink, (1.0 - x) / (1.0 - kink));
    }
    v[0] = v[mesh->node_count() - 1] = 0.0;
    return DiscreteField(mesh, v, true);
  };
  double worst = 0;
  for (double p : {1.5, 2.0, 3.0}) {
    const NFunction nf = build_nfunction(PhiKernel::power(p));
    const SystemSpec spec =
        make_spec(nf, mesh, "1+x", "2-x", {0.5, 0.3}, {0.2, 0.4}, {0.3, 0.2},
                  {0.1, 0.2}, StructureClass::General);
    const double eps = 0.3, delta = 0.2;
    const DiscreteField u = tent(0.3, 0.25);
    const DiscreteField v = tent(0.6, 0.2);
    const Eigen::SparseMatrix<double> J =
        assemble_jacobian(spec, u, v, eps, delta);
    const DofMap dofs(*mesh, 2);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd dir(dofs.size());
      for (int i = 0; i < dir.size(); ++i) dir[i] = unif(rng);
      dir /= dir.norm();
      const double h = 1e-6;
      DiscreteField up = u, um = u, vp = v, vm = v;
      for (int node : mesh->interior_nodes()) {
        up.values()[node] += h * dir[dofs.index(0, node)];
        um.values()[node] -= h * dir[dofs.index(0, node)];
        vp.values()[node] += h * dir[dofs.index(1, node)];
        vm.values()[node] -= h * dir[dofs.index(1, node)];
      }
      const Eigen::VectorXd fd = (assemble_residual(spec, up, vp, eps, delta) -
                                  assemble_residual(spec, um, vm, eps, delta)) /
                                 (2.0 * h);
      const Eigen::VectorXd an = J * dir;
      worst = std::max(worst,
                       (an - fd).norm() / std::max(an.norm(), 1e-12));
    }
  }
  note << "worst relative error " << worst;
  return worst <= 1e-5;
}

// ---------------------------------------------------------------- criterion 5
bool radius_gate(std::ostringstream& note) {
  if (g_stages.empty()) {
    note << "no continuation stages were collected";
    return false;
  }
  bool ok = true;
  double tightest = 1e300;
  for (const auto& [run, st] : g_stages) {
    tightest = std::min(tightest, st.r0 - (st.norm_u + st.norm_v));
    if (!(st.norm_u + st.norm_v <= st.r0)) {
      ok = false;
      note << run << " stage " << st.stage << ": " << st.norm_u + st.norm_v
           << " > " << st.r0 << "; ";
    }
  }
  note << g_stages.size() << " stages, smallest slack " << tightest;
  return ok;
}

}  // namespace

int main() {
  criterion(1, "kernel audit: exponents, conjugates, envelopes", 10.0,
            kernel_audit);
  criterion(2, "luxemburg norms: unit ball, homogeneity, poincare", 30.0,
            norm_audit);
  criterion(3, "linear sanity: quadratic kernel, constant load", 0.0,
            linear_sanity);
  criterion(4, "singular solves against the shooting oracle", 60.0,
            singular_oracle);
  criterion(6, "lower-bound certificates for the three structures", 0.0,
            lower_bound_certificate);
  criterion(7, "comparison suite with deliberate violators", 60.0,
            comparison_suite);
  criterion(8, "continuation stability and mesh refinement", 0.0,
            continuation_stability);
  criterion(9, "jacobian consistency against finite differences", 0.0,
            jacobian_consistency);
  criterion(5, "a-priori radius bound over all continuation stages", 0.0,
            radius_gate);

  std::sort(g_results.begin(), g_results.end(),
            [](const Outcome& a, const Outcome& b) {
              return a.number < b.number;
            });
  int failures = 0;
  for (const auto& r : g_results) {
    failures += r.pass ? 0 : 1;
    std::string timing;
    if (r.budget > 0) {
      timing = ", budget " + std::to_string(int(r.budget)) + "s";
    }
    std::printf("[%s] %d %s (%.2fs%s) %s\n", r.pass ? "PASS" : "FAIL",
                r.number, r.name.c_str(), r.seconds, timing.c_str(),
                r.note.c_str());
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
