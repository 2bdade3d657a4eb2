#pragma once

#include <functional>
#include <string>
#include <vector>

#include "velavg/grid.hpp"

namespace velavg {

/// Velocity profile g(lambda) of one separable flux term and its derivative.
struct FluxProfile {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

/// burgers:          (l - alpha)(l - beta) / 2
/// buckley_leverett: s^2 / (s^2 + (1 - s)^2) - s with s = (l - alpha) / (beta - alpha)
/// linear:           l
/// constant:         1
/// anything else is parsed as an expression in lambda and differenced numerically.
FluxProfile make_profile(const std::string& spec, double alpha, double beta);

/// Spatial coefficient k(t, x) in R^d of one flux term.
using Coefficient = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x)>;

struct FluxTerm {
  Coefficient coefficient;
  FluxProfile profile;
  bool x_dependent = false;
  bool t_dependent = false;
};

/// Flux F(t, x, l) = sum_m k_m(t, x) g_m(l) on [alpha, beta], periodic in x on
/// [0, L)^d. Coefficients may jump across the planes x_1 = c listed in
/// `interfaces`; they are smooth elsewhere.
class FluxModel {
 public:
  FluxModel(int dim, double alpha, double beta, double length, std::vector<FluxTerm> terms,
            std::vector<double> interfaces = {});

  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double length() const { return length_; }
  const std::vector<FluxTerm>& terms() const { return terms_; }
  const std::vector<double>& interfaces() const { return interfaces_; }
  bool piecewise() const { return !interfaces_.empty(); }
  bool x_dependent() const;
  bool t_dependent() const;
  /// Support radius of the mollifier in x (0 for the unsmoothed flux).
  double smoothing_radius() const { return radius_; }

  Eigen::VectorXd coefficient(std::size_t term, double t, const Eigen::VectorXd& x) const;
  Eigen::VectorXd flux(double t, const Eigen::VectorXd& x, double lambda) const;
  Eigen::VectorXd derivative(double t, const Eigen::VectorXd& x, double lambda) const;

  /// Throws ValidationError if an x-dependent flux does not vanish at alpha and
  /// beta (tolerance 1e-12 on samples) or f jumps in lambda on the sample grid.
  void validate(int x_samples = 33, int lambda_samples = 257) const;

  FluxModel smoothed(double radius) const;

 private:
  Eigen::VectorXd mollified_coefficient(std::size_t term, double t, const Eigen::VectorXd& x) const;

  int dim_;
  double alpha_;
  double beta_;
  double length_;
  std::vector<FluxTerm> terms_;
  std::vector<double> interfaces_;
  double radius_ = 0.0;
};

/// Smooth compactly supported bump on (-1, 1) with unit integral.
double bump(double s);

struct MollifiedFlux {
  FluxModel flux;
  int n;
  double radius;              // h_n, after clamping
  bool clamped = false;       // requested width was below the grid spacing
  double flux_error = 0.0;    // ||F_n - F||_{L^p(grid x lambda nodes)}
  double derivative_error = 0.0;
  std::vector<std::string> warnings;
};

/// Convolution of the coefficients in x with the bump of radius 2^-n L_ref.
/// The profiles are untouched, so F_n vanishes at alpha and beta exactly.
/// Radii below the grid spacing are clamped to it with a warning.
MollifiedFlux mollify_flux(const FluxModel& flux, int n, const SpaceGrid& grid, double reference_length,
                           double p = 1.0, int lambda_nodes = 33);

/// Per-cell coefficient samples of every term at time t: entry [m] is N^d x d.
std::vector<Eigen::MatrixXd> sample_coefficients(const FluxModel& flux, const SpaceGrid& grid, double t,
                                                 int jobs = 1);

/// max over cells and lambda samples of |f| (Euclidean) and per cell of max_l |f_axis|.
struct WaveSpeeds {
  double max_speed = 0.0;
  Eigen::MatrixXd per_cell;  // N^d x d: max over lambda of |f_axis(x_i, l)|
};
WaveSpeeds wave_speeds(const FluxModel& flux, const std::vector<Eigen::MatrixXd>& coefficients,
                       int lambda_samples = 257);

}  // namespace velavg
