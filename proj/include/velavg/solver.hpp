#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "velavg/diffusion.hpp"
#include "velavg/flux.hpp"

namespace velavg {

/// A(lambda) with A' = a, normalised by A(alpha) = 0. Either integrated from a
/// onto a fine table (linear interpolation between nodes) or given exactly.
class CapitalDiffusion {
 public:
  static CapitalDiffusion integrate(const DiffusionMatrix& a, double alpha, double beta,
                                    int nodes = 4097);
  static CapitalDiffusion exact(const DiffusionMatrix& a, double alpha, double beta,
                                std::function<Eigen::MatrixXd(double)> capital);

  int dim() const { return a_.dim(); }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const DiffusionMatrix& derivative() const { return a_; }
  Eigen::MatrixXd operator()(double lambda) const;
  /// Row i holds the row-major entries of A(values[i]).
  Eigen::MatrixXd evaluate(const Eigen::ArrayXd& values) const;
  bool vanishes() const { return max_norm_ == 0.0; }
  /// max over the table nodes of the spectral norm of a.
  double max_norm() const { return max_norm_; }

  /// Throws ValidationError unless <A(l) xi, xi> is non-decreasing in l on
  /// `nodes` samples for each of `directions` unit vectors.
  void validate_monotone(int nodes = 257, int directions = 16) const;

 private:
  CapitalDiffusion(DiffusionMatrix a, double alpha, double beta);

  DiffusionMatrix a_;
  double alpha_;
  double beta_;
  std::function<Eigen::MatrixXd(double)> exact_;
  Eigen::MatrixXd table_;  // node x row-major entries
  double max_norm_ = 0.0;
};

struct SolverState {
  RealField u;
  double t = 0.0;
  double dt = 0.0;
  double cfl = 0.4;
};

struct StepStats {
  double t;
  double mass;
  double min;
  double max;
  double min_zeta;  // NaN when the entropy residual is not tracked
};

struct SolverOptions {
  double t_final = 0.1;
  double cfl = 0.4;
  long max_steps = 10000000;
  /// Velocity nodes for the entropy residual; empty disables tracking.
  std::optional<LambdaGrid> entropy_lambdas;
  /// Store a snapshot every `snapshot_every` steps (0 disables).
  long snapshot_every = 0;
  int jobs = 1;
};

struct RunResult {
  explicit RunResult(SolverState start) : final_state(std::move(start)) {}

  SolverState final_state;
  std::vector<StepStats> history;
  double mass_drift = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  bool maximum_principle = true;
  long steps = 0;
  double min_zeta = 0.0;
  std::optional<KineticField> last_zeta;  // residual of the final step
  std::vector<RealField> snapshots;
  std::vector<double> snapshot_times;
};

/// Explicit conservative finite-volume scheme for
///   u_t + div F(t, x, u) = sum_ij d_i d_j A_ij(u)
/// on the periodic grid: Rusanov interface fluxes built from the cell-side flux
/// functions and central differences of A(u).
class KineticSolver {
 public:
  KineticSolver(FluxModel flux, CapitalDiffusion capital, SpaceGrid grid, int jobs = 1);

  const FluxModel& flux() const { return flux_; }
  const CapitalDiffusion& capital() const { return capital_; }
  const SpaceGrid& grid() const { return grid_; }

  /// min(dx / max|f|, dx^2 / (2 d max|a|)) times the CFL number.
  double stable_dt(double cfl, double t = 0.0) const;

  /// One step of length state.dt; throws CflError if it exceeds stable_dt(state.cfl).
  SolverState step(const SolverState& state) const;

  RunResult run(const RealField& initial, const SolverOptions& options) const;

  /// Interface entropy fluxes and diffusion terms: returns
  ///   -div_h Q(u, l) + sum_ij D_ij [sgn(u - l)(A_ij(u) - A_ij(l))]
  /// so that zeta = this - (|u_new - l| - |u - l|) / dt.
  KineticField entropy_space_terms(const RealField& u, const LambdaGrid& lambdas, double t) const;

  /// zeta on one time interval.
  KineticField entropy_step_residual(const RealField& before, const RealField& after, double dt,
                                     const LambdaGrid& lambdas, double t) const;

 private:
  struct Coefficients {
    std::vector<Eigen::MatrixXd> k;
    WaveSpeeds speeds;
  };
  const Coefficients& coefficients(double t, Coefficients& scratch) const;
  RealField increment(const RealField& u, double t) const;

  FluxModel flux_;
  CapitalDiffusion capital_;
  SpaceGrid grid_;
  int jobs_;
  Coefficients cached_;
  std::vector<std::vector<Index>> next_;  // periodic neighbour +1 per axis
  std::vector<std::vector<Index>> prev_;  // periodic neighbour -1 per axis
};

/// h(x, l) = sgn(u(x) - l) with sgn(0) = 0.
KineticField kinetic_lift(const RealField& u, const LambdaGrid& lambdas);

/// (\int_alpha^beta h dl + alpha + beta) / 2 with the trapezoid rule.
RealField average_reconstruct(const KineticField& h, double alpha, double beta);

/// \int rho(l) h(x, l) dl with rho sampled on the velocity nodes.
RealField velocity_avg(const KineticField& h, const Eigen::VectorXd& rho);
RealField velocity_avg(const KineticField& h, const std::function<double(double)>& rho);

struct EntropyResidualField {
  std::vector<KineticField> slabs;  // one per time interval
  double min = 0.0;
};

/// Residual on every interval of a trajectory sampled at uniform dt from t0.
/// Throws DomainError for fewer than two snapshots.
EntropyResidualField entropy_residual(const std::vector<RealField>& trajectory, double dt, double t0,
                                      const KineticSolver& solver, const LambdaGrid& lambdas);

}  // namespace velavg
