#include "philap/config.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "philap/expression.hpp"

namespace philap {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

double number_at(const json& j, const char* key, double fallback,
                 bool* present = nullptr) {
  if (!j.contains(key)) {
    if (present) *present = false;
    return fallback;
  }
  if (present) *present = true;
  if (!j[key].is_number()) fail(std::string(key) + " must be a number");
  return j[key].get<double>();
}

std::array<double, 2> pair_at(const json& j, const char* key,
                              std::array<double, 2> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j[key];
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    fail(std::string(key) + " must be an array of two numbers");
  return {v[0].get<double>(), v[1].get<double>()};
}

std::array<std::string, 2> expr_pair_at(const json& j, const char* key,
                                        std::array<std::string, 2> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j[key];
  if (!v.is_array() || v.size() != 2 || !v[0].is_string() || !v[1].is_string())
    fail(std::string(key) + " must be an array of two expression strings");
  return {v[0].get<std::string>(), v[1].get<std::string>()};
}

KernelConfig parse_kernel(const json& j, const char* where) {
  if (!j.is_object()) fail(std::string(where) + " must be an object");
  KernelConfig k;
  if (!j.contains("family") || !j["family"].is_string())
    fail(std::string(where) + " needs a string 'family'");
  k.family = j["family"].get<std::string>();
  if (k.family == "power") {
    bool present = false;
    k.p = number_at(j, "p", 2.0, &present);
    if (!present) fail(std::string(where) + ": power kernel needs 'p'");
  } else if (k.family == "sum-powers") {
    if (!j.contains("exponents") || !j["exponents"].is_array() ||
        j["exponents"].empty())
      fail(std::string(where) + ": sum-powers kernel needs 'exponents'");
    for (const auto& e : j["exponents"]) {
      if (!e.is_number())
        fail(std::string(where) + ": exponents must be numbers");
      k.exponents.push_back(e.get<double>());
    }
  } else {
    fail(std::string(where) + ": unknown kernel family '" + k.family +
         "' (expected 'power' or 'sum-powers')");
  }
  return k;
}

}  // namespace

const std::vector<std::string>& known_experiments() {
  static const std::vector<std::string> names = {
      "nfunction-audit", "solve", "continuation", "comparison", "barrier"};
  return names;
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("config root must be a JSON object");

  RunConfig cfg;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("seed must be a nonnegative integer");
    cfg.seed = j["seed"].get<unsigned>();
  }
  cfg.n_dim = number_at(j, "n_dim", 0.0);

  if (!j.contains("kernel")) fail("config needs a 'kernel' block");
  cfg.kernel = parse_kernel(j["kernel"], "kernel");
  if (j.contains("psi")) cfg.psi = parse_kernel(j["psi"], "psi");

  if (j.contains("mesh")) {
    const auto& m = j["mesh"];
    if (!m.is_object()) fail("mesh must be an object");
    cfg.mesh.dim = int(number_at(m, "dim", 1));
    if (cfg.mesh.dim != 1 && cfg.mesh.dim != 2) fail("mesh.dim must be 1 or 2");
    cfg.mesh.x0 = number_at(m, "x0", 0.0);
    cfg.mesh.x1 = number_at(m, "x1", 1.0);
    cfg.mesh.y0 = number_at(m, "y0", 0.0);
    cfg.mesh.y1 = number_at(m, "y1", 1.0);
    cfg.mesh.cells = int(number_at(m, "cells", 100));
    cfg.mesh.cells_x = int(number_at(m, "cells_x", 10));
    cfg.mesh.cells_y = int(number_at(m, "cells_y", 10));
    if (cfg.mesh.x1 <= cfg.mesh.x0) fail("mesh extent must have x1 > x0");
    if (cfg.mesh.dim == 2 && cfg.mesh.y1 <= cfg.mesh.y0)
      fail("mesh extent must have y1 > y0");
    if (cfg.mesh.cells < 2 || cfg.mesh.cells_x < 1 || cfg.mesh.cells_y < 1)
      fail("mesh cell counts are too small");
  }

  if (j.contains("system")) {
    const auto& s = j["system"];
    if (!s.is_object()) fail("system must be an object");
    if (s.contains("structure")) {
      if (!s["structure"].is_string()) fail("system.structure must be a string");
      cfg.structure = s["structure"].get<std::string>();
      parse_structure(cfg.structure);  // validates the name
    }
    cfg.alpha = pair_at(s, "alpha", cfg.alpha);
    cfg.beta = pair_at(s, "beta", cfg.beta);
    cfg.gamma = pair_at(s, "gamma", cfg.gamma);
    cfg.sigma = pair_at(s, "sigma", cfg.sigma);
    cfg.a = expr_pair_at(s, "a", cfg.a);
    cfg.b = expr_pair_at(s, "b", cfg.b);
    if (s.contains("q")) {
      const auto& qv = s["q"];
      if (!qv.is_array() || qv.size() != 2)
        fail("system.q must be an array of two numbers");
      for (int i = 0; i < 2; ++i)
        if (!qv[i].is_null()) {
          if (!qv[i].is_number()) fail("system.q entries must be numbers");
          cfg.q[i] = qv[i].get<double>();
        }
    }
    for (const auto& expr : {cfg.a[0], cfg.a[1], cfg.b[0], cfg.b[1]}) {
      try {
        Expression::parse(expr);
      } catch (const ParseError& e) {
        fail(std::string("coefficient expression rejected: ") + e.what());
      }
    }
  }

  if (j.contains("solver")) {
    const auto& s = j["solver"];
    if (!s.is_object()) fail("solver must be an object");
    cfg.newton.residual_tol = number_at(s, "newton_tol", cfg.newton.residual_tol);
    cfg.newton.step_tol = number_at(s, "step_tol", cfg.newton.step_tol);
    cfg.newton.max_iters = int(number_at(s, "max_iters", cfg.newton.max_iters));
    cfg.continuation_tol =
        number_at(s, "continuation_tol", cfg.continuation_tol);
    cfg.eta = number_at(s, "eta", cfg.eta);
    cfg.eps = number_at(s, "eps", cfg.eps);
    cfg.delta = number_at(s, "delta", cfg.delta);
    if (s.contains("schedule")) {
      if (!s["schedule"].is_array()) fail("solver.schedule must be an array");
      for (const auto& e : s["schedule"]) {
        if (!e.is_number()) fail("solver.schedule entries must be numbers");
        cfg.schedule.push_back(e.get<double>());
      }
      for (size_t k = 0; k < cfg.schedule.size(); ++k) {
        if (cfg.schedule[k] <= 0) fail("solver.schedule entries must be positive");
        if (k > 0 && cfg.schedule[k] >= cfg.schedule[k - 1])
          fail("solver.schedule must be strictly decreasing");
      }
    }
    if (cfg.newton.residual_tol <= 0 || cfg.newton.step_tol <= 0 ||
        cfg.newton.max_iters < 1)
      fail("solver tolerances must be positive");
  }

  if (j.contains("comparison")) {
    const auto& c = j["comparison"];
    if (!c.is_object()) fail("comparison must be an object");
    if (c.contains("f")) {
      if (!c["f"].is_string()) fail("comparison.f must be a string");
      cfg.comparison.f = c["f"].get<std::string>();
      try {
        Expression::parse(cfg.comparison.f);
      } catch (const ParseError& e) {
        fail(std::string("comparison.f rejected: ") + e.what());
      }
    }
    cfg.comparison.scale = number_at(c, "scale", cfg.comparison.scale);
    cfg.comparison.residual_tol =
        number_at(c, "residual_tol", cfg.comparison.residual_tol);
    cfg.comparison.ordering_tol =
        number_at(c, "ordering_tol", cfg.comparison.ordering_tol);
    if (cfg.comparison.scale <= 0) fail("comparison.scale must be positive");
  }

  if (!j.contains("experiments") || !j["experiments"].is_array())
    fail("config needs an 'experiments' array");
  for (const auto& e : j["experiments"]) {
    if (!e.is_string()) fail("experiments entries must be strings");
    const std::string name = e.get<std::string>();
    const auto& known = known_experiments();
    if (std::find(known.begin(), known.end(), name) == known.end())
      fail("unknown experiment '" + name + "'");
    cfg.experiments.push_back(name);
  }
  if (cfg.experiments.empty()) fail("experiments list must not be empty");

  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) fail("output_dir must be a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

PhiKernel build_kernel(const KernelConfig& cfg) {
  if (cfg.family == "power") return PhiKernel::power(cfg.p);
  if (cfg.family == "sum-powers") return PhiKernel::sum_powers(cfg.exponents);
  fail("unknown kernel family '" + cfg.family + "'");
}

std::shared_ptr<const Mesh> build_mesh(const MeshConfig& cfg) {
  if (cfg.dim == 1) return Mesh::interval(cfg.x0, cfg.x1, cfg.cells);
  return Mesh::rectangle(cfg.x0, cfg.x1, cfg.y0, cfg.y1, cfg.cells_x,
                         cfg.cells_y);
}

StructureClass parse_structure(const std::string& name) {
  if (name == "general") return StructureClass::General;
  if (name == "cooperative") return StructureClass::Cooperative;
  if (name == "noncooperative" || name == "non-cooperative")
    return StructureClass::NonCooperative;
  if (name == "mixed") return StructureClass::Mixed;
  fail("unknown structure class '" + name +
       "' (expected general, cooperative, noncooperative, or mixed)");
}

SystemSpec build_system(const RunConfig& cfg) {
  const PhiKernel kernel = build_kernel(cfg.kernel);
  NFunction nf = build_nfunction(kernel, 400, cfg.n_dim);
  auto mesh = build_mesh(cfg.mesh);
  SystemSpec spec{nf,
                  mesh,
                  {sample_coefficient(mesh, Expression::parse(cfg.a[0])),
                   sample_coefficient(mesh, Expression::parse(cfg.a[1]))},
                  {sample_coefficient(mesh, Expression::parse(cfg.b[0])),
                   sample_coefficient(mesh, Expression::parse(cfg.b[1]))},
                  cfg.alpha,
                  cfg.beta,
                  cfg.gamma,
                  cfg.sigma,
                  cfg.q,
                  std::nullopt,
                  cfg.n_dim,
                  parse_structure(cfg.structure)};
  if (cfg.psi) spec.psi = build_nfunction(build_kernel(*cfg.psi), 400, 0);
  return spec;
}

}  // namespace philap
