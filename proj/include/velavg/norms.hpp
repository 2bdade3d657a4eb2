#pragma once

#include <cmath>
#include <limits>

#include "velavg/grid.hpp"

namespace velavg {

/// Axis-aligned box selecting the grid cells whose centres lie in [lo, hi).
struct Window {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  static Window whole(const SpaceGrid& grid);
  bool contains(const Eigen::VectorXd& x) const;
};

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Riemann-sum L^p norm over the box; p = kInfinity gives the max norm.
template <typename Scalar>
double lp_norm(const Field<Scalar>& u, double p) {
  if (!(p >= 1.0)) throw DomainError("L^p norm needs p >= 1");
  const auto mod = u.values().abs();
  if (std::isinf(p)) return mod.maxCoeff();
  return std::pow(mod.pow(p).sum() * u.grid().cell_volume(), 1.0 / p);
}

/// L^p norm in (x, lambda) with trapezoid weights in lambda.
template <typename Scalar>
double lp_norm(const KineticFieldT<Scalar>& u, double p) {
  if (!(p >= 1.0)) throw DomainError("L^p norm needs p >= 1");
  const auto mod = u.values().abs();
  if (std::isinf(p)) return mod.maxCoeff();
  const Eigen::VectorXd per_point = mod.pow(p).matrix() * u.lambdas().weights();
  return std::pow(per_point.sum() * u.grid().cell_volume(), 1.0 / p);
}

/// Mixed norm  ( \int ( \int |u|^2 dlambda )^{q/2} dx )^{1/q}.
template <typename Scalar>
double mixed_norm(const KineticFieldT<Scalar>& u, double q) {
  if (!(q >= 1.0)) throw DomainError("mixed norm needs q >= 1");
  const Eigen::ArrayXd inner =
      (u.values().abs2().matrix() * u.lambdas().weights()).array().sqrt();
  if (std::isinf(q)) return inner.maxCoeff();
  return std::pow(inner.pow(q).sum() * u.grid().cell_volume(), 1.0 / q);
}

/// \int_window |u - v| dx; throws DomainError if no cell centre lies in the window.
double l1_local_distance(const RealField& u, const RealField& v, const Window& window);

/// Measure of the cells selected by the window.
double window_measure(const SpaceGrid& grid, const Window& window);

}  // namespace velavg
