#include "velavg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "velavg/defect.hpp"
#include "velavg/parallel.hpp"

namespace velavg {

namespace {

constexpr int kSpeedSamples = 1025;
constexpr double kBoundTolerance = 1e-12;

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

double mass(const RealField& u) { return u.values().sum() * u.grid().cell_volume(); }

}  // namespace

CapitalDiffusion::CapitalDiffusion(DiffusionMatrix a, double alpha, double beta)
    : a_(std::move(a)), alpha_(alpha), beta_(beta) {
  if (!(alpha_ < beta_)) throw ValidationError("capital diffusion needs alpha < beta");
}

CapitalDiffusion CapitalDiffusion::integrate(const DiffusionMatrix& a, double alpha, double beta,
                                             int nodes) {
  if (nodes < 2) throw ValidationError("capital diffusion table needs at least two nodes");
  CapitalDiffusion out(a, alpha, beta);
  const int d = a.dim();
  const double step = (beta - alpha) / (nodes - 1);
  out.table_ = Eigen::MatrixXd::Zero(nodes, d * d);
  auto flat = [d](const Eigen::MatrixXd& m) {
    Eigen::RowVectorXd row(d * d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) row[i * d + j] = m(i, j);
    }
    return row;
  };
  Eigen::MatrixXd left = a(alpha);
  out.max_norm_ = left.operatorNorm();
  for (int k = 1; k < nodes; ++k) {
    const double l = k == nodes - 1 ? beta : alpha + k * step;
    const Eigen::MatrixXd mid = a(l - 0.5 * step);
    const Eigen::MatrixXd right = a(l);
    // Simpson's rule per table cell.
    out.table_.row(k) = out.table_.row(k - 1) + step / 6.0 * flat(left + 4.0 * mid + right);
    out.max_norm_ = std::max({out.max_norm_, mid.operatorNorm(), right.operatorNorm()});
    left = right;
  }
  return out;
}

CapitalDiffusion CapitalDiffusion::exact(const DiffusionMatrix& a, double alpha, double beta,
                                         std::function<Eigen::MatrixXd(double)> capital) {
  CapitalDiffusion out(a, alpha, beta);
  out.exact_ = std::move(capital);
  const int samples = 4097;
  for (int k = 0; k < samples; ++k) {
    out.max_norm_ = std::max(out.max_norm_, a(alpha + (beta - alpha) * k / (samples - 1)).operatorNorm());
  }
  return out;
}

Eigen::MatrixXd CapitalDiffusion::operator()(double lambda) const {
  if (exact_) return exact_(lambda);
  const Eigen::MatrixXd row = evaluate(Eigen::ArrayXd::Constant(1, lambda));
  const int d = dim();
  Eigen::MatrixXd out(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) out(i, j) = row(0, i * d + j);
  }
  return out;
}

Eigen::MatrixXd CapitalDiffusion::evaluate(const Eigen::ArrayXd& values) const {
  const int d = dim();
  Eigen::MatrixXd out(values.size(), d * d);
  if (exact_) {
    for (Index i = 0; i < values.size(); ++i) {
      const Eigen::MatrixXd m = exact_(values[i]);
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) out(i, r * d + c) = m(r, c);
      }
    }
    return out;
  }
  const Index last = table_.rows() - 1;
  const double step = (beta_ - alpha_) / last;
  for (Index i = 0; i < values.size(); ++i) {
    // Linear interpolation inside the table, linear extension outside it.
    const double s = (values[i] - alpha_) / step;
    const Index k = std::clamp<Index>(static_cast<Index>(std::floor(s)), 0, last - 1);
    const double w = s - k;
    out.row(i) = (1.0 - w) * table_.row(k) + w * table_.row(k + 1);
  }
  return out;
}

void CapitalDiffusion::validate_monotone(int nodes, int directions) const {
  const auto dirs = unit_directions(dim(), dim() == 1 ? 1 : directions);
  for (const auto& xi : dirs) {
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < nodes; ++k) {
      const double l = alpha_ + (beta_ - alpha_) * k / (nodes - 1);
      const double v = xi.dot((*this)(l) * xi);
      if (v < prev - 1e-12 * std::max(1.0, std::abs(prev))) {
        throw ValidationError("<A(lambda) xi, xi> decreases near lambda = " + std::to_string(l));
      }
      prev = v;
    }
  }
}

KineticSolver::KineticSolver(FluxModel flux, CapitalDiffusion capital, SpaceGrid grid, int jobs)
    : flux_(std::move(flux)), capital_(std::move(capital)), grid_(grid), jobs_(jobs) {
  if (flux_.dim() != grid_.dim() || capital_.dim() != grid_.dim()) {
    throw ShapeError("flux, diffusion and grid dimensions differ");
  }
  if (flux_.alpha() != capital_.alpha() || flux_.beta() != capital_.beta()) {
    throw ValidationError("flux and diffusion use different velocity intervals");
  }
  next_.assign(grid_.dim(), std::vector<Index>(grid_.size()));
  prev_ = next_;
  for (int axis = 0; axis < grid_.dim(); ++axis) {
    for (Index i = 0; i < grid_.size(); ++i) {
      next_[axis][i] = grid_.neighbour(i, axis, 1);
      prev_[axis][i] = grid_.neighbour(i, axis, -1);
    }
  }
  if (!flux_.t_dependent()) {
    cached_.k = sample_coefficients(flux_, grid_, 0.0, jobs_);
    cached_.speeds = wave_speeds(flux_, cached_.k, kSpeedSamples);
  }
}

const KineticSolver::Coefficients& KineticSolver::coefficients(double t, Coefficients& scratch) const {
  if (!flux_.t_dependent()) return cached_;
  scratch.k = sample_coefficients(flux_, grid_, t, jobs_);
  scratch.speeds = wave_speeds(flux_, scratch.k, kSpeedSamples);
  return scratch;
}

double KineticSolver::stable_dt(double cfl, double t) const {
  Coefficients scratch;
  const double speed = coefficients(t, scratch).speeds.max_speed;
  const double h = grid_.spacing();
  double dt = std::numeric_limits<double>::infinity();
  if (speed > 0.0) dt = std::min(dt, h / speed);
  if (capital_.max_norm() > 0.0) dt = std::min(dt, h * h / (2.0 * grid_.dim() * capital_.max_norm()));
  return cfl * dt;
}

RealField KineticSolver::increment(const RealField& u, double t) const {
  Coefficients scratch;
  const Coefficients& coef = coefficients(t, scratch);
  const Index cells = grid_.size();
  const int d = grid_.dim();
  const double h = grid_.spacing();
  const std::size_t terms = flux_.terms().size();

  Eigen::MatrixXd g(cells, terms);
  for (std::size_t m = 0; m < terms; ++m) {
    for (Index i = 0; i < cells; ++i) g(i, m) = flux_.terms()[m].profile.value(u[i]);
  }
  auto side_flux = [&](Index i, int axis) {
    double f = 0.0;
    for (std::size_t m = 0; m < terms; ++m) f += coef.k[m](i, axis) * g(i, m);
    return f;
  };

  RealField rate(grid_);
  for (int axis = 0; axis < d; ++axis) {
    // Interface i + 1/2 along `axis`, stored at cell i.
    Eigen::ArrayXd face(cells);
    for (Index i = 0; i < cells; ++i) {
      const Index j = next_[axis][i];
      const double c = std::max(coef.speeds.per_cell(i, axis), coef.speeds.per_cell(j, axis));
      face[i] = 0.5 * (side_flux(i, axis) + side_flux(j, axis)) - 0.5 * c * (u[j] - u[i]);
    }
    for (Index i = 0; i < cells; ++i) {
      rate[i] -= (face[i] - face[prev_[axis][i]]) / h;
    }
  }

  if (!capital_.vanishes()) {
    const Eigen::MatrixXd entries = capital_.evaluate(u.values());
    for (Index i = 0; i < cells; ++i) {
      double acc = 0.0;
      for (int axis = 0; axis < d; ++axis) {
        const int e = axis * d + axis;
        acc += entries(next_[axis][i], e) - 2.0 * entries(i, e) +
               entries(prev_[axis][i], e);
      }
      if (d == 2) {
        auto cross = [&](Index k) { return entries(k, 1) + entries(k, 2); };
        const Index up = next_[0][i];
        const Index down = prev_[0][i];
        acc += 0.25 * (cross(next_[1][up]) - cross(prev_[1][up]) -
                       cross(next_[1][down]) + cross(prev_[1][down]));
      }
      rate[i] += acc / (h * h);
    }
  }
  return rate;
}

SolverState KineticSolver::step(const SolverState& state) const {
  if (state.u.grid() != grid_) throw ShapeError("state grid differs from solver grid");
  const double limit = stable_dt(state.cfl, state.t);
  if (!(state.dt > 0.0)) throw DomainError("time step must be positive");
  if (state.dt > limit * (1.0 + 1e-12)) throw CflError(state.dt, limit);
  SolverState next = state;
  next.u.values() += state.dt * increment(state.u, state.t).values();
  next.t = state.t + state.dt;
  return next;
}

RunResult KineticSolver::run(const RealField& initial, const SolverOptions& options) const {
  if (initial.grid() != grid_) throw ShapeError("initial data grid differs from solver grid");
  if (initial.values().minCoeff() < flux_.alpha() - kBoundTolerance ||
      initial.values().maxCoeff() > flux_.beta() + kBoundTolerance) {
    throw ValidationError("initial data leaves [alpha, beta]");
  }
  if (!(options.t_final >= 0.0)) throw ValidationError("final time must be non-negative");

  RunResult out(SolverState{initial, 0.0, 0.0, options.cfl});
  const double mass0 = mass(initial);
  out.min_u = initial.values().minCoeff();
  out.max_u = initial.values().maxCoeff();
  out.min_zeta = options.entropy_lambdas ? std::numeric_limits<double>::infinity() : 0.0;
  if (options.snapshot_every > 0) {
    out.snapshots.push_back(initial);
    out.snapshot_times.push_back(0.0);
  }
  SolverState& state = out.final_state;
  const double end_tolerance = 1e-12 * std::max(1.0, options.t_final);
  while (state.t < options.t_final - end_tolerance) {
    if (out.steps >= options.max_steps) {
      throw EvaluationError("step budget of " + std::to_string(options.max_steps) + " exhausted at t = " +
                            std::to_string(state.t));
    }
    const double limit = stable_dt(options.cfl, state.t);
    state.dt = std::min(limit, options.t_final - state.t);
    const RealField before = state.u;
    state = step(state);
    ++out.steps;

    StepStats stats{state.t, mass(state.u), state.u.values().minCoeff(), state.u.values().maxCoeff(),
                    std::numeric_limits<double>::quiet_NaN()};
    if (options.entropy_lambdas) {
      KineticField zeta = entropy_step_residual(before, state.u, state.dt, *options.entropy_lambdas,
                                                state.t - state.dt);
      stats.min_zeta = zeta.values().minCoeff();
      out.min_zeta = std::min(out.min_zeta, stats.min_zeta);
      out.last_zeta = std::move(zeta);
    }
    out.mass_drift = std::max(out.mass_drift, std::abs(stats.mass - mass0));
    out.min_u = std::min(out.min_u, stats.min);
    out.max_u = std::max(out.max_u, stats.max);
    if (stats.min < flux_.alpha() - kBoundTolerance || stats.max > flux_.beta() + kBoundTolerance) {
      out.maximum_principle = false;
    }
    out.history.push_back(stats);
    if (options.snapshot_every > 0 && out.steps % options.snapshot_every == 0) {
      out.snapshots.push_back(state.u);
      out.snapshot_times.push_back(state.t);
    }
  }
  if (options.entropy_lambdas && out.steps == 0) out.min_zeta = 0.0;
  return out;
}

KineticField KineticSolver::entropy_space_terms(const RealField& u, const LambdaGrid& lambdas,
                                                double t) const {
  if (u.grid() != grid_) throw ShapeError("field grid differs from solver grid");
  Coefficients scratch;
  const Coefficients& coef = coefficients(t, scratch);
  const Index cells = grid_.size();
  const int d = grid_.dim();
  const double h = grid_.spacing();
  const std::size_t terms = flux_.terms().size();
  const int m_nodes = lambdas.nodes();

  Eigen::MatrixXd g_u(cells, terms);
  Eigen::MatrixXd g_l(m_nodes, terms);
  for (std::size_t m = 0; m < terms; ++m) {
    for (Index i = 0; i < cells; ++i) g_u(i, m) = flux_.terms()[m].profile.value(u[i]);
    for (int j = 0; j < m_nodes; ++j) g_l(j, m) = flux_.terms()[m].profile.value(lambdas.node(j));
  }
  const bool diffusive = !capital_.vanishes();
  const Eigen::MatrixXd a_u = diffusive ? capital_.evaluate(u.values()) : Eigen::MatrixXd();
  const Eigen::MatrixXd a_l = diffusive ? capital_.evaluate(lambdas.node_vector().array()) : Eigen::MatrixXd();

  KineticField out(grid_, lambdas);
  parallel_for(m_nodes, jobs_, [&](int j) {
    const double l = lambdas.node(j);
    Eigen::ArrayXd result = Eigen::ArrayXd::Zero(cells);
    for (int axis = 0; axis < d; ++axis) {
      // Cell-side entropy flux q_i = sgn(u_i - l)(F_i(u_i) - F_i(l)).
      Eigen::ArrayXd q(cells);
      for (Index i = 0; i < cells; ++i) {
        double diff = 0.0;
        for (std::size_t m = 0; m < terms; ++m) diff += coef.k[m](i, axis) * (g_u(i, m) - g_l(j, m));
        q[i] = sgn(u[i] - l) * diff;
      }
      Eigen::ArrayXd face(cells);
      for (Index i = 0; i < cells; ++i) {
        const Index k = next_[axis][i];
        const double c = std::max(coef.speeds.per_cell(i, axis), coef.speeds.per_cell(k, axis));
        face[i] = 0.5 * (q[i] + q[k]) - 0.5 * c * (std::abs(u[k] - l) - std::abs(u[i] - l));
      }
      for (Index i = 0; i < cells; ++i) result[i] -= (face[i] - face[prev_[axis][i]]) / h;
    }
    if (diffusive) {
      Eigen::MatrixXd s(cells, d * d);
      for (Index i = 0; i < cells; ++i) s.row(i) = sgn(u[i] - l) * (a_u.row(i) - a_l.row(j));
      for (Index i = 0; i < cells; ++i) {
        double acc = 0.0;
        for (int axis = 0; axis < d; ++axis) {
          const int e = axis * d + axis;
          acc += s(next_[axis][i], e) - 2.0 * s(i, e) + s(prev_[axis][i], e);
        }
        if (d == 2) {
          auto cross = [&](Index k) { return s(k, 1) + s(k, 2); };
          const Index up = next_[0][i];
          const Index down = prev_[0][i];
          acc += 0.25 * (cross(next_[1][up]) - cross(prev_[1][up]) -
                         cross(next_[1][down]) + cross(prev_[1][down]));
        }
        result[i] += acc / (h * h);
      }
    }
    out.values().col(j) = result;
  });
  return out;
}

KineticField KineticSolver::entropy_step_residual(const RealField& before, const RealField& after,
                                                  double dt, const LambdaGrid& lambdas, double t) const {
  if (!(dt > 0.0)) throw DomainError("entropy residual needs a positive time step");
  KineticField zeta = entropy_space_terms(before, lambdas, t);
  for (int j = 0; j < lambdas.nodes(); ++j) {
    const double l = lambdas.node(j);
    zeta.values().col(j) -= ((after.values() - l).abs() - (before.values() - l).abs()) / dt;
  }
  return zeta;
}

KineticField kinetic_lift(const RealField& u, const LambdaGrid& lambdas) {
  KineticField h(u.grid(), lambdas);
  for (int j = 0; j < lambdas.nodes(); ++j) {
    const double l = lambdas.node(j);
    h.values().col(j) = u.values().unaryExpr([l](double v) { return sgn(v - l); });
  }
  return h;
}

RealField average_reconstruct(const KineticField& h, double alpha, double beta) {
  RealField out(h.grid(), (h.values().matrix() * h.lambdas().weights()).array());
  out.values() = 0.5 * (out.values() + alpha + beta);
  return out;
}

RealField velocity_avg(const KineticField& h, const Eigen::VectorXd& rho) {
  if (rho.size() != h.lambdas().nodes()) throw ShapeError("weight samples do not match velocity nodes");
  return RealField(h.grid(), (h.values().matrix() * h.lambdas().weights().cwiseProduct(rho)).array());
}

RealField velocity_avg(const KineticField& h, const std::function<double(double)>& rho) {
  Eigen::VectorXd samples(h.lambdas().nodes());
  for (int j = 0; j < samples.size(); ++j) samples[j] = rho(h.lambdas().node(j));
  return velocity_avg(h, samples);
}

EntropyResidualField entropy_residual(const std::vector<RealField>& trajectory, double dt, double t0,
                                      const KineticSolver& solver, const LambdaGrid& lambdas) {
  if (trajectory.size() < 2) throw DomainError("entropy residual needs at least two snapshots");
  EntropyResidualField out;
  out.min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) {
    out.slabs.push_back(
        solver.entropy_step_residual(trajectory[k], trajectory[k + 1], dt, lambdas, t0 + k * dt));
    out.min = std::min(out.min, out.slabs.back().values().minCoeff());
  }
  return out;
}

}  // namespace velavg
