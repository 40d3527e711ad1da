// JSON run configuration: kernel, mesh, system, solver, and experiment list,
// plus factories turning the parsed blocks into live objects.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "philap/solver.hpp"

namespace philap {

struct KernelConfig {
  std::string family = "power";  // "power" | "sum-powers"
  double p = 2.0;
  std::vector<double> exponents;  // sum-powers only
};

struct MeshConfig {
  int dim = 1;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  int cells = 100;                 // 1-D
  int cells_x = 10, cells_y = 10;  // 2-D
};

struct ComparisonConfig {
  std::string f = "1/(1+t)";  // reaction expression in x (y, d) and t
  double scale = 1.5;         // u2 = scale * u1
  double residual_tol = 1e-7;
  double ordering_tol = 1e-10;
};

struct RunConfig {
  unsigned seed = 1234;
  double n_dim = 0;  // dimension parameter for the growth-comparison check
  KernelConfig kernel;
  std::optional<KernelConfig> psi;
  MeshConfig mesh;

  // system block
  std::string structure = "general";
  std::array<double, 2> alpha{0.0, 0.0};
  std::array<double, 2> beta{0.0, 0.0};
  std::array<double, 2> gamma{0.0, 0.0};
  std::array<double, 2> sigma{0.0, 0.0};
  std::array<std::string, 2> a{"0", "0"};
  std::array<std::string, 2> b{"0", "0"};
  std::array<std::optional<double>, 2> q{};

  // solver block
  NewtonOptions newton{};
  std::vector<double> schedule;  // empty: continuation default
  double continuation_tol = 1e-7;
  double eta = -1;
  double eps = 1.0;   // single-solve experiment
  double delta = 0.0;

  ComparisonConfig comparison;

  std::vector<std::string> experiments;
  std::string output_dir = "out";
};

// Known experiment names, in no particular order.
const std::vector<std::string>& known_experiments();

// Parse + structural validation (experiment list nonempty and known, schedule
// decreasing, blocks well-formed).  Throws ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

PhiKernel build_kernel(const KernelConfig& cfg);
std::shared_ptr<const Mesh> build_mesh(const MeshConfig& cfg);
StructureClass parse_structure(const std::string& name);
// Kernel -> NFunction, mesh, sampled coefficients, exponents: the full system.
SystemSpec build_system(const RunConfig& cfg);

}  // namespace philap
