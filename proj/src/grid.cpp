#include "velavg/grid.hpp"

#include <cmath>
#include <string>

namespace velavg {

SpaceGrid::SpaceGrid(int dim, int points, double length)
    : dim_(dim), points_(points), length_(length) {
  if (dim != 1 && dim != 2) throw DomainError("grid dimension must be 1 or 2");
  if (points < 8 || (points & (points - 1)) != 0) {
    throw DomainError("grid points per axis must be a power of two >= 8, got " +
                      std::to_string(points));
  }
  if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("grid length must be positive");
  size_ = dim == 1 ? Index(points) : Index(points) * points;
}

double SpaceGrid::cell_volume() const { return std::pow(spacing(), dim_); }

double SpaceGrid::volume() const { return std::pow(length_, dim_); }

int SpaceGrid::axis_index(Index flat, int axis) const {
  if (dim_ == 1) return static_cast<int>(flat);
  return axis == 0 ? static_cast<int>(flat / points_) : static_cast<int>(flat % points_);
}

Index SpaceGrid::neighbour(Index flat_index, int axis, int offset) const {
  if (dim_ == 1) {
    return ((flat_index + offset) % points_ + points_) % points_;
  }
  int i0 = axis_index(flat_index, 0);
  int i1 = axis_index(flat_index, 1);
  if (axis == 0) {
    i0 = ((i0 + offset) % points_ + points_) % points_;
  } else {
    i1 = ((i1 + offset) % points_ + points_) % points_;
  }
  return flat(i0, i1);
}

Eigen::VectorXd SpaceGrid::point(Index flat_index) const {
  Eigen::VectorXd x(dim_);
  for (int a = 0; a < dim_; ++a) x[a] = coordinate(axis_index(flat_index, a));
  return x;
}

Eigen::VectorXd SpaceGrid::frequency(Index flat_index) const {
  Eigen::VectorXd xi(dim_);
  for (int a = 0; a < dim_; ++a) xi[a] = wavenumber(axis_index(flat_index, a)) / length_;
  return xi;
}

LambdaGrid::LambdaGrid(double lo, double hi, int nodes) : lo_(lo), hi_(hi), nodes_(nodes) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("velocity interval must satisfy lo < hi");
  }
  if (nodes < 2) throw DomainError("velocity grid needs at least two nodes");
  weights_ = Eigen::VectorXd::Constant(nodes, spacing());
  weights_[0] *= 0.5;
  weights_[nodes - 1] *= 0.5;
}

Eigen::VectorXd LambdaGrid::node_vector() const {
  Eigen::VectorXd v(nodes_);
  for (int j = 0; j < nodes_; ++j) v[j] = node(j);
  return v;
}

}  // namespace velavg
