#pragma once

// Test-side oracles: written independently of the library so that library
// results are checked against separate arithmetic.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "velavg/grid.hpp"

namespace oracle {

using velavg::Complex;
using velavg::Index;

inline double pi() { return std::numbers::pi; }

/// Deterministic uniform samples in [lo, hi).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo = -1.0, double hi = 1.0) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

 private:
  std::mt19937_64 gen_;
};

inline velavg::RealField random_field(const velavg::SpaceGrid& grid, std::uint64_t seed) {
  Rng rng(seed);
  velavg::RealField u(grid);
  for (Index i = 0; i < grid.size(); ++i) u[i] = rng.uniform();
  return u;
}

inline velavg::RealField zero_mean(velavg::RealField u) {
  u.values() -= u.values().mean();
  return u;
}

/// O(N^{2d}) transform  c_k = h^d sum_j u_j exp(-2 pi i k.j / N), with k the
/// signed wavenumbers in the library's storage order.
inline std::vector<Complex> direct_dft(const velavg::ComplexField& u) {
  const auto& g = u.grid();
  const int n = g.points();
  const double cell = std::pow(g.spacing(), g.dim());
  std::vector<Complex> out(g.size());
  for (Index k = 0; k < g.size(); ++k) {
    Complex sum(0.0);
    for (Index j = 0; j < g.size(); ++j) {
      double phase = 0.0;
      for (int a = 0; a < g.dim(); ++a) {
        phase += double(g.wavenumber(g.axis_index(k, a))) * g.axis_index(j, a) / n;
      }
      sum += u[j] * std::polar(1.0, -2.0 * pi() * phase);
    }
    out[k] = cell * sum;
  }
  return out;
}

/// Riemann sum of |u|^2 over the box.
inline double energy(const velavg::RealField& u) {
  return u.values().square().sum() * std::pow(u.grid().spacing(), u.grid().dim());
}

}  // namespace oracle
