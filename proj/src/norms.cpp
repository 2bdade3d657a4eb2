#include "velavg/norms.hpp"

namespace velavg {

Window Window::whole(const SpaceGrid& grid) {
  return {Eigen::VectorXd::Zero(grid.dim()), Eigen::VectorXd::Constant(grid.dim(), grid.length())};
}

bool Window::contains(const Eigen::VectorXd& x) const {
  for (Index a = 0; a < x.size(); ++a) {
    if (x[a] < lo[a] || x[a] >= hi[a]) return false;
  }
  return true;
}

double window_measure(const SpaceGrid& grid, const Window& window) {
  Index count = 0;
  for (Index i = 0; i < grid.size(); ++i) count += window.contains(grid.point(i)) ? 1 : 0;
  return count * grid.cell_volume();
}

double l1_local_distance(const RealField& u, const RealField& v, const Window& window) {
  if (u.grid() != v.grid()) throw ShapeError("fields live on different grids");
  if (window.lo.size() != u.grid().dim() || window.hi.size() != u.grid().dim()) {
    throw ShapeError("window dimension does not match the grid");
  }
  double total = 0.0;
  Index count = 0;
  for (Index i = 0; i < u.size(); ++i) {
    if (!window.contains(u.grid().point(i))) continue;
    total += std::abs(u[i] - v[i]);
    ++count;
  }
  if (count == 0) throw DomainError("window contains no grid cells");
  return total * u.grid().cell_volume();
}

}  // namespace velavg
