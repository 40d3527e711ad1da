#include "philap/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "philap/comparison.hpp"
#include "philap/orlicz.hpp"

namespace philap {
namespace fs = std::filesystem;

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

// 1 = configuration / hypothesis problem, 2 = numerical solve failure.
int classify(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const InvalidSpec*>(&e) ||
      dynamic_cast<const ExponentOutOfRange*>(&e) ||
      dynamic_cast<const NonMonotoneKernel*>(&e))
    return 1;
  return 2;
}

struct Staging {
  fs::path dir;
  std::vector<fs::path> files;

  explicit Staging(const std::string& output_dir)
      : dir(fs::path(output_dir + ".staging")) {
    std::error_code ec;
    fs::remove_all(dir, ec);
    fs::create_directories(dir);
  }

  std::ofstream open(const std::string& name) {
    const fs::path p = dir / name;
    files.push_back(p);
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write artifact " + p.string());
    return out;
  }

  void promote(const std::string& output_dir) const {
    const fs::path target(output_dir);
    fs::create_directories(target);
    for (const auto& f : files) {
      const fs::path to = target / f.filename();
      std::error_code ec;
      fs::remove(to, ec);
      fs::rename(f, to);
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

std::string kernel_label(const KernelConfig& k) {
  if (k.family == "power") return "power p=" + csv_num(k.p);
  std::string s = "sum-powers";
  for (double e : k.exponents) s += " " + csv_num(e);
  return s;
}

void write_fields_csv(std::ofstream& out, const Mesh& mesh,
                      const std::vector<const DiscreteField*>& cols,
                      const std::vector<std::string>& names) {
  out << "node,x,y";
  for (const auto& n : names) out << "," << n;
  out << "\n";
  for (int i = 0; i < mesh.node_count(); ++i) {
    const auto& p = mesh.node(i);
    out << i << "," << csv_num(p[0]) << "," << csv_num(p[1]);
    for (const auto* f : cols) out << "," << csv_num((*f)[i]);
    out << "\n";
  }
}

void append_validation(std::ostringstream& summary, const ValidationReport& vr) {
  for (const auto& c : vr.checks) {
    const char* status = c.status == CheckStatus::Pass         ? "pass"
                         : c.status == CheckStatus::Fail       ? "FAIL"
                                                               : "unverified";
    summary << "  check " << c.name << ": " << status;
    if (!c.detail.empty()) summary << " (" << c.detail << ")";
    summary << "\n";
  }
}

BarrierKind barrier_kind_for(StructureClass s) {
  switch (s) {
    case StructureClass::NonCooperative:
      return BarrierKind::PowerScalar;
    case StructureClass::Mixed:
      return BarrierKind::MixedScalar;
    default:
      return BarrierKind::SingularScalar;
  }
}

}  // namespace

RunResult run(const RunConfig& cfg, bool check_only, int verbosity) {
  std::ostringstream summary;
  const auto now = std::chrono::system_clock::now();
  const std::time_t now_t = std::chrono::system_clock::to_time_t(now);
  char stamp[64];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%d %H:%M:%S",
                std::gmtime(&now_t));
  summary << "# run summary\n";
  summary << "# generated: " << stamp << " UTC\n";
  summary << "seed: " << cfg.seed << "\n";
  summary << "kernel: " << kernel_label(cfg.kernel) << "\n";
  if (cfg.mesh.dim == 1)
    summary << "mesh: interval [" << csv_num(cfg.mesh.x0) << ","
            << csv_num(cfg.mesh.x1) << "] cells=" << cfg.mesh.cells << "\n";
  else
    summary << "mesh: rectangle [" << csv_num(cfg.mesh.x0) << ","
            << csv_num(cfg.mesh.x1) << "]x[" << csv_num(cfg.mesh.y0) << ","
            << csv_num(cfg.mesh.y1) << "] cells=" << cfg.mesh.cells_x << "x"
            << cfg.mesh.cells_y << "\n";

  const auto progress = [&](const std::string& line) {
    if (verbosity >= 1) std::cout << "[philap] " << line << "\n";
  };

  RunResult result;
  if (check_only) {
    try {
      const SystemSpec spec = build_system(cfg);
      const ValidationReport vr = validate(spec);
      summary << "validation (check only):\n";
      append_validation(summary, vr);
      summary << "overall: " << (vr.solver_ok() ? "ok" : "validation failed")
              << "\n";
      result.exit_code = vr.solver_ok() ? 0 : 1;
    } catch (const Error& e) {
      summary << "failure: " << e.what() << "\n";
      summary << "overall: validation failed\n";
      result.exit_code = 1;
    }
    result.summary = summary.str();
    if (verbosity >= 1) std::cout << result.summary;
    return result;
  }

  Staging staging(cfg.output_dir);
  try {
    // Lazily built shared objects.
    std::optional<SystemSpec> spec;
    const auto system = [&]() -> const SystemSpec& {
      if (!spec) {
        spec = build_system(cfg);
        const ValidationReport vr = validate(*spec);
        summary << "system validation:\n";
        append_validation(summary, vr);
        if (!spec->psi) {
          summary << "  note: no growth-comparison function configured; "
                     "theorem-level growth checks stay unverified\n";
        }
        if (!vr.solver_ok())
          throw InvalidSpec("system validation failed; see summary");
      }
      return *spec;
    };

    int index = 0;
    for (const auto& name : cfg.experiments) {
      ++index;
      const std::string tag = std::to_string(index) + "_" + name;
      progress("experiment " + tag);

      if (name == "nfunction-audit") {
        const NFunction nf = build_nfunction(build_kernel(cfg.kernel), 400,
                                             cfg.n_dim);
        // Fenchel round trip: Phi**(t) recovered through the conjugate at the
        // stationary point s = t phi(t).
        double worst_roundtrip = 0;
        const int npts = 50;
        for (int k = 0; k < npts; ++k) {
          const double t =
              1e-3 * std::pow(1e6, double(k) / (npts - 1));  // up to 1e3
          const double s = nf.Phi_prime(t);
          const double back = t * s - nf.conjugate(s);
          const double err = std::abs(back - nf.Phi(t)) /
                             std::max(1.0, std::abs(nf.Phi(t)));
          worst_roundtrip = std::max(worst_roundtrip, err);
        }
        std::mt19937 rng(cfg.seed);
        std::uniform_real_distribution<double> log10u(-3.0, 3.0);
        std::vector<ZetaSample> samples;
        samples.reserve(10000);
        for (int k = 0; k < 10000; ++k) {
          const double rho = std::pow(10.0, log10u(rng));
          const double t = std::pow(10.0, log10u(rng));
          samples.push_back(ZetaSample{rho, t});
        }
        const ZetaReport zr = check_zeta_bounds(nf, samples);
        auto out = staging.open(tag + ".csv");
        out << "quantity,value\n";
        out << "ell," << csv_num(nf.ell()) << "\n";
        out << "m," << csv_num(nf.m()) << "\n";
        out << "conjugate_roundtrip_points," << npts << "\n";
        out << "conjugate_roundtrip_max_error," << csv_num(worst_roundtrip)
            << "\n";
        out << "zeta_samples," << zr.checked << "\n";
        out << "zeta_worst_lower_margin," << csv_num(zr.worst_lower) << "\n";
        out << "zeta_worst_upper_margin," << csv_num(zr.worst_upper) << "\n";
        out << "zeta_worst_conj_lower_margin," << csv_num(zr.worst_conj_lower)
            << "\n";
        out << "zeta_worst_conj_upper_margin," << csv_num(zr.worst_conj_upper)
            << "\n";
        summary << "experiment " << tag << ": ok (ell=" << csv_num(nf.ell())
                << ", m=" << csv_num(nf.m()) << ", conjugate roundtrip "
                << csv_num(worst_roundtrip) << ", zeta margins ok)\n";

      } else if (name == "solve") {
        const SystemSpec& s = system();
        const auto seeds = zero_state_seed(s, cfg.eps, cfg.delta);
        RegularizationParams params{cfg.eps, cfg.delta, cfg.eta};
        const RegularizedSolution sol =
            newton_solve(s, params, seeds[0], seeds[1], cfg.newton);
        auto out = staging.open(tag + "-fields.csv");
        write_fields_csv(out, *s.mesh, {&sol.u, &sol.v}, {"u", "v"});
        const double nu = luxemburg_norm(s.nf, sol.u, NormKind::Gradient);
        const double nv = luxemburg_norm(s.nf, sol.v, NormKind::Gradient);
        summary << "experiment " << tag << ": ok (eps=" << csv_num(cfg.eps)
                << ", delta=" << csv_num(cfg.delta) << ", iters "
                << sol.report.iterations << ", residual "
                << csv_num(sol.report.residual_norm) << ", norms "
                << csv_num(nu) << "/" << csv_num(nv) << ")\n";

      } else if (name == "continuation") {
        const SystemSpec& s = system();
        ContinuationOptions copts;
        copts.schedule = cfg.schedule;
        copts.increment_tol = cfg.continuation_tol;
        copts.newton = cfg.newton;
        copts.eta = cfg.eta;
        const ContinuationReport rep = continuation_solve(s, copts);
        auto out = staging.open(tag + ".csv");
        out << "stage,eps,delta,norm_u,norm_v,residual,increment,c_lower,r0\n";
        for (const auto& st : rep.stages) {
          out << st.stage << "," << csv_num(st.eps) << ","
              << csv_num(st.delta) << "," << csv_num(st.norm_u) << ","
              << csv_num(st.norm_v) << "," << csv_num(st.residual) << ","
              << csv_num(st.increment) << "," << csv_num(st.c_lower) << ","
              << csv_num(st.r0) << "\n";
          if (verbosity >= 2)
            std::cout << "  stage " << st.stage << " eps "
                      << csv_num(st.eps) << " increment "
                      << csv_num(st.increment) << "\n";
        }
        auto diag = staging.open(tag + "-diagnostics.csv");
        diag << "stage,newton_iters,used_picard,pairing,barrier_margin,"
                "truncation,r0_eps_independent\n";
        for (const auto& st : rep.stages)
          diag << st.stage << "," << st.newton_iters << ","
               << (st.used_picard ? 1 : 0) << "," << csv_num(st.pairing) << ","
               << csv_num(st.barrier_margin) << "," << csv_num(st.truncation)
               << "," << (st.r0_eps_independent ? 1 : 0) << "\n";
        auto fields = staging.open(tag + "-fields.csv");
        write_fields_csv(fields, *s.mesh, {&rep.u, &rep.v}, {"u", "v"});
        if (rep.barrier_u && rep.barrier_v) {
          auto bf = staging.open(tag + "-barriers.csv");
          write_fields_csv(bf, *s.mesh, {&*rep.barrier_u, &*rep.barrier_v},
                           {"w1", "w2"});
        }
        const auto& last = rep.stages.back();
        summary << "experiment " << tag << ": ok (" << rep.stages.size()
                << " stages" << (rep.stopped_early ? ", early stop" : "")
                << ", final increment " << csv_num(last.increment)
                << ", C_lower " << csv_num(last.c_lower) << ", r0 "
                << csv_num(last.r0) << ")\n";

      } else if (name == "comparison") {
        const NFunction nf = build_nfunction(build_kernel(cfg.kernel), 400,
                                             cfg.n_dim);
        const auto mesh = build_mesh(cfg.mesh);
        const Expression f = Expression::parse(cfg.comparison.f);
        const DiscreteField u1 = solve_scalar(nf, mesh, f, cfg.newton, cfg.eta);
        DiscreteField u2 = u1;
        u2.values() *= cfg.comparison.scale;
        ComparisonInstance inst{nf,
                                mesh,
                                u1,
                                u2,
                                f,
                                cfg.comparison.residual_tol,
                                cfg.comparison.ordering_tol,
                                1e-13,
                                "config"};
        const ComparisonReport rep = comparison_test(inst);
        auto out = staging.open(tag + ".csv");
        out << "id,verdict,sub_ok,super_ok,monotone_ok,boundary_ok,"
               "ordering_margin,ratio_bound,pairing,excluded_nodes\n";
        out << inst.id << "," << verdict_name(rep.verdict) << ","
            << rep.sub_ok << "," << rep.super_ok << "," << rep.monotone_ok
            << "," << rep.boundary_ok << "," << csv_num(rep.ordering_margin)
            << "," << csv_num(rep.ratio_bound) << "," << csv_num(rep.pairing)
            << "," << rep.excluded_nodes << "\n";
        summary << "experiment " << tag << ": "
                << verdict_name(rep.verdict) << " (margin "
                << csv_num(rep.ordering_margin) << ", detail: " << rep.detail
                << ")\n";

      } else if (name == "barrier") {
        const SystemSpec& s = system();
        const BarrierKind kind = barrier_kind_for(s.structure);
        const BarrierSolution b1 = solve_barrier(s, kind, 1, cfg.newton);
        const BarrierSolution b2 = solve_barrier(s, kind, 2, cfg.newton);
        auto out = staging.open(tag + "-fields.csv");
        write_fields_csv(out, *s.mesh, {&b1.w, &b2.w}, {"w1", "w2"});
        summary << "experiment " << tag << ": ok (max w1 "
                << csv_num(b1.w.values().maxCoeff()) << ", max w2 "
                << csv_num(b2.w.values().maxCoeff());
        if (kind == BarrierKind::MixedScalar)
          summary << ", g " << csv_num(b1.g_value) << "/"
                  << csv_num(b2.g_value);
        summary << ")\n";
      }
    }

    summary << "overall: ok\n";
    auto sum_file = staging.open("summary.txt");
    sum_file << summary.str();
    sum_file.close();
    staging.promote(cfg.output_dir);
    result.exit_code = 0;
  } catch (const Error& e) {
    result.exit_code = classify(e);
    summary << "failure: " << e.what() << "\n";
    summary << "overall: "
            << (result.exit_code == 1 ? "validation failed" : "solver failed")
            << "\n";
    // The summary still lands on disk, but only in the staging area; the
    // output directory is left untouched.
    try {
      auto sum_file = staging.open("summary.txt");
      sum_file << summary.str();
    } catch (const Error&) {
    }
    std::cerr << "[philap] error: " << e.what() << "\n";
  }
  result.summary = summary.str();
  if (verbosity >= 1 && result.exit_code == 0)
    std::cout << "[philap] artifacts in " << cfg.output_dir << "\n";
  return result;
}

}  // namespace philap
