#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>

#include "velavg/errors.hpp"

namespace velavg {

using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Uniform periodic grid on the box [0, L)^d with N cell-centred points per axis.
///
/// Values are stored with a flat index that is row-major over the axes, so for
/// d = 2 the point (i0, i1) sits at i0 * N + i1. The dual lattice uses physical
/// frequencies k / L with k in [-N/2, N/2).
class SpaceGrid {
 public:
  SpaceGrid(int dim, int points, double length);

  int dim() const { return dim_; }
  int points() const { return points_; }
  double length() const { return length_; }
  double spacing() const { return length_ / points_; }
  Index size() const { return size_; }
  double cell_volume() const;
  double volume() const;

  double coordinate(int i) const { return (i + 0.5) * spacing(); }
  int axis_index(Index flat, int axis) const;
  Index flat(int i0, int i1 = 0) const { return dim_ == 1 ? i0 : Index(i0) * points_ + i1; }
  Index neighbour(Index flat, int axis, int offset) const;
  Eigen::VectorXd point(Index flat) const;

  int wavenumber(int i) const { return i < points_ / 2 ? i : i - points_; }
  Eigen::VectorXd frequency(Index flat) const;

  bool operator==(const SpaceGrid& other) const {
    return dim_ == other.dim_ && points_ == other.points_ && length_ == other.length_;
  }
  bool operator!=(const SpaceGrid& other) const { return !(*this == other); }

 private:
  int dim_;
  int points_;
  double length_;
  Index size_;
};

/// Velocity grid on [lo, hi] with M nodes and trapezoid weights.
class LambdaGrid {
 public:
  LambdaGrid(double lo, double hi, int nodes);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  int nodes() const { return nodes_; }
  double spacing() const { return (hi_ - lo_) / (nodes_ - 1); }
  double node(int j) const { return j == nodes_ - 1 ? hi_ : lo_ + j * spacing(); }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::VectorXd node_vector() const;

  bool operator==(const LambdaGrid& other) const {
    return lo_ == other.lo_ && hi_ == other.hi_ && nodes_ == other.nodes_;
  }
  bool operator!=(const LambdaGrid& other) const { return !(*this == other); }

 private:
  double lo_;
  double hi_;
  int nodes_;
  Eigen::VectorXd weights_;
};

/// Grid function with real or complex values.
template <typename Scalar>
class Field {
 public:
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  explicit Field(SpaceGrid grid) : grid_(grid), values_(Values::Zero(grid.size())) {}

  Field(SpaceGrid grid, Values values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw ShapeError("field has " + std::to_string(values_.size()) + " values, grid has " +
                       std::to_string(grid_.size()) + " points");
    }
  }

  template <typename Fn>
  static Field sample(const SpaceGrid& grid, Fn&& fn) {
    Values values(grid.size());
    for (Index i = 0; i < grid.size(); ++i) values[i] = fn(grid.point(i));
    return Field(grid, std::move(values));
  }

  const SpaceGrid& grid() const { return grid_; }
  const Values& values() const { return values_; }
  Values& values() { return values_; }
  Scalar operator[](Index i) const { return values_[i]; }
  Scalar& operator[](Index i) { return values_[i]; }
  Index size() const { return values_.size(); }

 private:
  SpaceGrid grid_;
  Values values_;
};

using RealField = Field<double>;
using ComplexField = Field<Complex>;

/// Function of (x, lambda): one column per velocity node, one row per grid point.
template <typename Scalar>
class KineticFieldT {
 public:
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  KineticFieldT(SpaceGrid grid, LambdaGrid lambdas)
      : grid_(grid), lambdas_(lambdas), values_(Values::Zero(grid.size(), lambdas.nodes())) {}

  KineticFieldT(SpaceGrid grid, LambdaGrid lambdas, Values values)
      : grid_(grid), lambdas_(lambdas), values_(std::move(values)) {
    if (values_.rows() != grid_.size() || values_.cols() != lambdas_.nodes()) {
      throw ShapeError("kinetic field extents do not match its grids");
    }
  }

  const SpaceGrid& grid() const { return grid_; }
  const LambdaGrid& lambdas() const { return lambdas_; }
  const Values& values() const { return values_; }
  Values& values() { return values_; }

  Field<Scalar> slice(int j) const { return Field<Scalar>(grid_, values_.col(j)); }
  void set_slice(int j, const Field<Scalar>& field) {
    if (field.grid() != grid_) throw ShapeError("slice grid does not match kinetic field");
    values_.col(j) = field.values();
  }

 private:
  SpaceGrid grid_;
  LambdaGrid lambdas_;
  Values values_;
};

using KineticField = KineticFieldT<double>;
using ComplexKineticField = KineticFieldT<Complex>;

/// Fourier coefficients on the dual lattice, in the same flat order as the grid.
struct SpectralField {
  SpaceGrid grid;
  Eigen::ArrayXcd coefficients;
};

}  // namespace velavg
