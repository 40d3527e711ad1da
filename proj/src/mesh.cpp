#include "philap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace philap {

namespace {

void finish_element_geometry(int dim, const std::vector<std::array<double, 2>>& nodes,
                             const std::array<int, 3>& elem, double& measure,
                             std::array<std::array<double, 2>, 3>& grads) {
  if (dim == 1) {
    const double a = nodes[elem[0]][0];
    const double b = nodes[elem[1]][0];
    const double h = b - a;
    if (!(h > 0)) throw DegenerateElement("segment with non-positive length");
    measure = h;
    grads[0] = {-1.0 / h, 0.0};
    grads[1] = {1.0 / h, 0.0};
    grads[2] = {0.0, 0.0};
    return;
  }
  const auto& pa = nodes[elem[0]];
  const auto& pb = nodes[elem[1]];
  const auto& pc = nodes[elem[2]];
  const double two_area = (pb[0] - pa[0]) * (pc[1] - pa[1]) -
                          (pc[0] - pa[0]) * (pb[1] - pa[1]);
  if (!(two_area > 0)) throw DegenerateElement("triangle with non-positive area");
  measure = 0.5 * two_area;
  grads[0] = {(pb[1] - pc[1]) / two_area, (pc[0] - pb[0]) / two_area};
  grads[1] = {(pc[1] - pa[1]) / two_area, (pa[0] - pc[0]) / two_area};
  grads[2] = {(pa[1] - pb[1]) / two_area, (pb[0] - pa[0]) / two_area};
}

}  // namespace

std::shared_ptr<const Mesh> Mesh::interval(double x0, double x1, int cells) {
  if (!(x1 > x0) || cells < 1) {
    throw InvalidSpec("interval mesh needs x1 > x0 and at least one cell");
  }
  auto mesh = std::shared_ptr<Mesh>(new Mesh());
  mesh->dim_ = 1;
  mesh->x0_ = x0;
  mesh->x1_ = x1;
  const double h = (x1 - x0) / cells;
  mesh->nodes_.resize(cells + 1);
  for (int i = 0; i <= cells; ++i) {
    mesh->nodes_[i] = {x0 + i * h, 0.0};
  }
  mesh->nodes_.back()[0] = x1;
  mesh->elements_.resize(cells);
  mesh->measures_.resize(cells);
  mesh->gradients_.resize(cells);
  for (int e = 0; e < cells; ++e) {
    mesh->elements_[e] = {e, e + 1, -1};
    finish_element_geometry(1, mesh->nodes_, mesh->elements_[e],
                            mesh->measures_[e], mesh->gradients_[e]);
  }
  mesh->boundary_.assign(cells + 1, false);
  mesh->boundary_.front() = mesh->boundary_.back() = true;
  for (int i = 1; i < cells; ++i) mesh->interior_.push_back(i);
  mesh->diameter_ = x1 - x0;
  mesh->measure_ = x1 - x0;
  return mesh;
}

std::shared_ptr<const Mesh> Mesh::rectangle(double x0, double x1, double y0,
                                            double y1, int cells_x,
                                            int cells_y) {
  if (!(x1 > x0) || !(y1 > y0) || cells_x < 1 || cells_y < 1) {
    throw InvalidSpec("rectangle mesh needs positive extents and cells");
  }
  auto mesh = std::shared_ptr<Mesh>(new Mesh());
  mesh->dim_ = 2;
  mesh->x0_ = x0;
  mesh->x1_ = x1;
  mesh->y0_ = y0;
  mesh->y1_ = y1;
  const int nx = cells_x + 1, ny = cells_y + 1;
  const double hx = (x1 - x0) / cells_x;
  const double hy = (y1 - y0) / cells_y;
  mesh->nodes_.resize(size_t(nx) * ny);
  mesh->boundary_.assign(size_t(nx) * ny, false);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int id = iy * nx + ix;
      mesh->nodes_[id] = {x0 + ix * hx, y0 + iy * hy};
      if (ix == 0 || ix == cells_x || iy == 0 || iy == cells_y) {
        mesh->boundary_[id] = true;
      }
    }
  }
  for (int id = 0; id < int(mesh->nodes_.size()); ++id) {
    if (!mesh->boundary_[id]) mesh->interior_.push_back(id);
  }
  // two triangles per cell, split along the lower-left to upper-right diagonal
  mesh->elements_.reserve(size_t(cells_x) * cells_y * 2);
  for (int iy = 0; iy < cells_y; ++iy) {
    for (int ix = 0; ix < cells_x; ++ix) {
      const int a = iy * nx + ix;
      const int b = a + 1;
      const int c = a + nx + 1;
      const int d = a + nx;
      mesh->elements_.push_back({a, b, c});
      mesh->elements_.push_back({a, c, d});
    }
  }
  mesh->measures_.resize(mesh->elements_.size());
  mesh->gradients_.resize(mesh->elements_.size());
  for (int e = 0; e < int(mesh->elements_.size()); ++e) {
    finish_element_geometry(2, mesh->nodes_, mesh->elements_[e],
                            mesh->measures_[e], mesh->gradients_[e]);
  }
  mesh->diameter_ = std::hypot(x1 - x0, y1 - y0);
  mesh->measure_ = (x1 - x0) * (y1 - y0);
  return mesh;
}

void Mesh::quadrature(int e, std::array<QuadPoint, 3>& out) const {
  const auto& el = elements_[e];
  if (dim_ == 1) {
    // 3-point Gauss-Legendre, exact through degree 5
    static const double pts[3] = {-0.774596669241483377, 0.0,
                                  0.774596669241483377};
    static const double wts[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const double a = nodes_[el[0]][0];
    const double b = nodes_[el[1]][0];
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int q = 0; q < 3; ++q) {
      const double x = mid + half * pts[q];
      out[q].x = {x, 0.0};
      out[q].weight = wts[q] * half;
      const double t = (x - a) / (b - a);
      out[q].shape = {1.0 - t, t, 0.0};
    }
    return;
  }
  // edge-midpoint rule, exact through degree 2
  static const double bary[3][3] = {
      {0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
  for (int q = 0; q < 3; ++q) {
    double x = 0, y = 0;
    for (int v = 0; v < 3; ++v) {
      x += bary[q][v] * nodes_[el[v]][0];
      y += bary[q][v] * nodes_[el[v]][1];
    }
    out[q].x = {x, y};
    out[q].weight = measures_[e] / 3.0;
    out[q].shape = {bary[q][0], bary[q][1], bary[q][2]};
  }
}

double Mesh::boundary_distance(const std::array<double, 2>& x) const {
  if (dim_ == 1) {
    return std::max(0.0, std::min(x[0] - x0_, x1_ - x[0]));
  }
  const double dx = std::min(x[0] - x0_, x1_ - x[0]);
  const double dy = std::min(x[1] - y0_, y1_ - x[1]);
  return std::max(0.0, std::min(dx, dy));
}

DiscreteField::DiscreteField(std::shared_ptr<const Mesh> mesh,
                             Eigen::VectorXd values, bool zero_trace)
    : mesh_(std::move(mesh)), values_(std::move(values)),
      zero_trace_(zero_trace) {
  if (values_.size() != mesh_->node_count()) {
    throw InvalidSpec("field size does not match mesh node count");
  }
  if (zero_trace_) {
    for (int i = 0; i < mesh_->node_count(); ++i) {
      if (mesh_->is_boundary(i) && values_[i] != 0.0) {
        std::ostringstream os;
        os << "zero-trace field has value " << values_[i]
           << " at boundary node " << i;
        throw InvalidSpec(os.str());
      }
    }
  }
}

DiscreteField DiscreteField::zeros(std::shared_ptr<const Mesh> mesh,
                                   bool zero_trace) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh->node_count());
  return DiscreteField(std::move(mesh), std::move(v), zero_trace);
}

DiscreteField DiscreteField::constant(std::shared_ptr<const Mesh> mesh,
                                      double value) {
  Eigen::VectorXd v =
      Eigen::VectorXd::Constant(mesh->node_count(), value);
  return DiscreteField(std::move(mesh), std::move(v), false);
}

DiscreteField DiscreteField::sample(
    std::shared_ptr<const Mesh> mesh,
    const std::function<double(double, double)>& f, bool zero_trace) {
  Eigen::VectorXd v(mesh->node_count());
  for (int i = 0; i < mesh->node_count(); ++i) {
    const auto& x = mesh->node(i);
    v[i] = f(x[0], x[1]);
  }
  if (zero_trace) {
    for (int i = 0; i < mesh->node_count(); ++i) {
      if (mesh->is_boundary(i)) v[i] = 0.0;
    }
  }
  return DiscreteField(std::move(mesh), std::move(v), zero_trace);
}

std::array<double, 2> DiscreteField::gradient(int e) const {
  const auto& el = mesh_->element(e);
  std::array<double, 2> g{0.0, 0.0};
  for (int v = 0; v < mesh_->nodes_per_element(); ++v) {
    const auto& bg = mesh_->basis_gradient(e, v);
    g[0] += values_[el[v]] * bg[0];
    g[1] += values_[el[v]] * bg[1];
  }
  return g;
}

double DiscreteField::at(int e, const Mesh::QuadPoint& qp) const {
  const auto& el = mesh_->element(e);
  double v = 0;
  for (int i = 0; i < mesh_->nodes_per_element(); ++i) {
    v += qp.shape[i] * values_[el[i]];
  }
  return v;
}

DiscreteField distance_function(std::shared_ptr<const Mesh> mesh) {
  Eigen::VectorXd v(mesh->node_count());
  for (int i = 0; i < mesh->node_count(); ++i) {
    v[i] = mesh->boundary_distance(mesh->node(i));
  }
  return DiscreteField(std::move(mesh), std::move(v), true);
}

}  // namespace philap
