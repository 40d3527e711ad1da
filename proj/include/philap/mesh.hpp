// P1 meshes and nodal fields.  Domains are an interval or an axis-aligned
// rectangle; the rectangle is triangulated with a fixed lower-left to
// upper-right diagonal per cell so runs are reproducible.  Quadrature is a
// 3-point Gauss rule per segment in 1-D and the 3-point edge-midpoint rule per
// triangle in 2-D (exact through degree 2), which is what the modulars and
// load integrals below need.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "philap/errors.hpp"

namespace philap {

class Mesh {
 public:
  static std::shared_ptr<const Mesh> interval(double x0, double x1, int cells);
  static std::shared_ptr<const Mesh> rectangle(double x0, double x1, double y0,
                                               double y1, int cells_x,
                                               int cells_y);

  int dim() const { return dim_; }
  int node_count() const { return int(nodes_.size()); }
  int element_count() const { return int(elements_.size()); }
  int nodes_per_element() const { return dim_ + 1; }

  const std::array<double, 2>& node(int i) const { return nodes_[i]; }
  // Node ids of element e; entry 2 is -1 for segments.
  const std::array<int, 3>& element(int e) const { return elements_[e]; }
  double element_measure(int e) const { return measures_[e]; }
  // Gradient of the local P1 basis function on element e (constant vector).
  const std::array<double, 2>& basis_gradient(int e, int local) const {
    return gradients_[e][local];
  }

  bool is_boundary(int node) const { return boundary_[node]; }
  const std::vector<int>& interior_nodes() const { return interior_; }

  double diameter() const { return diameter_; }
  double measure() const { return measure_; }

  struct QuadPoint {
    std::array<double, 2> x{};
    double weight = 0;
    std::array<double, 3> shape{};  // P1 basis values at the point
  };
  // Fills the 3-point rule for element e.
  void quadrature(int e, std::array<QuadPoint, 3>& out) const;

  // Exact distance to the domain boundary at a point.
  double boundary_distance(const std::array<double, 2>& x) const;

 private:
  Mesh() = default;
  int dim_ = 1;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
  std::vector<std::array<double, 2>> nodes_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<double> measures_;
  std::vector<std::array<std::array<double, 2>, 3>> gradients_;
  std::vector<bool> boundary_;
  std::vector<int> interior_;
  double diameter_ = 0;
  double measure_ = 0;
};

// Nodal P1 field over a shared mesh.  A field tagged zero-trace must vanish at
// every boundary node; the constructor enforces the tag.
class DiscreteField {
 public:
  DiscreteField(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd values,
                bool zero_trace = false);
  static DiscreteField zeros(std::shared_ptr<const Mesh> mesh,
                             bool zero_trace = true);
  static DiscreteField constant(std::shared_ptr<const Mesh> mesh, double value);
  // Nodal interpolation of f(x, y).
  static DiscreteField sample(std::shared_ptr<const Mesh> mesh,
                              const std::function<double(double, double)>& f,
                              bool zero_trace = false);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  double operator[](int i) const { return values_[i]; }
  bool zero_trace() const { return zero_trace_; }

  // Constant gradient on element e.
  std::array<double, 2> gradient(int e) const;
  // P1 value at a quadrature point.
  double at(int e, const Mesh::QuadPoint& qp) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  Eigen::VectorXd values_;
  bool zero_trace_ = false;
};

// Nodal field of exact boundary distances (zero-trace by construction).
DiscreteField distance_function(std::shared_ptr<const Mesh> mesh);

}  // namespace philap
