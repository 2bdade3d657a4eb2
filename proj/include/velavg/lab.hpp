#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "velavg/defect.hpp"
#include "velavg/solver.hpp"

namespace velavg {

/// How the members of a sequence differ: by the smoothing radius of the flux,
/// or by the period h_n of oscillating initial data u_n(x) = U(x, x_1 / h_n).
enum class LadderKind { mollify, oscillate };

struct AveragingWeight {
  std::string name;
  std::function<double(double)> rho;
};

/// Test function phi(x) psi(z, lambda) rho(lambda) described independently of the grid.
struct TestSpec {
  std::string id;
  std::function<double(const Eigen::VectorXd&)> phi;
  ProjectedSymbol psi;
  std::function<double(double)> rho;

  TestSymbol on(const SpaceGrid& grid) const;
};

struct Scenario {
  std::string name;
  SpaceGrid grid;
  LambdaGrid lambdas;
  FluxModel flux;
  DiffusionMatrix diffusion;
  CapitalDiffusion capital;
  /// u_0(x, s) with s = x_1 / h_n the fast variable (ignored by mollify ladders).
  std::function<double(const Eigen::VectorXd& x, double fast)> initial;
  LadderKind kind = LadderKind::mollify;
  std::vector<int> ladder{3, 4, 5, 6, 7};
  double reference_length = 1.0;
  double t_final = 0.1;
  double cfl = 0.4;
  bool track_entropy = true;
  std::vector<AveragingWeight> weights;
  Window window;
  std::vector<TestSpec> tests;
  /// Cut-off applied to the sgn test sequence.
  std::function<double(const Eigen::VectorXd&)> sequence_window;
  ExponentProfile exponents;
  int jobs = 1;

  double smoothing_length(int n) const { return std::ldexp(reference_length, -n); }
  RealField initial_data(int n) const;
};

/// One member of the sequence at the final time.
struct SequenceEntry {
  int n = 0;
  RealField u;
  KineticField h;
  /// -div_h Q + D_h^2 S at the final state: the entropy defect plus d_t |u - l|.
  KineticField entropy_terms;
  /// (f - f_n) h_n per axis.
  std::vector<KineticField> source;
  double mass_drift = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  bool maximum_principle = true;
  double min_zeta = 0.0;
  long steps = 0;
  double flux_error = 0.0;
  double derivative_error = 0.0;
  std::vector<std::string> warnings;
};

struct SequenceRun {
  Scenario scenario;
  std::vector<SequenceEntry> entries;  // ladder order
  std::size_t reference = 0;           // index of the finest n
  /// Unsmoothed f(x_i, l_j) per axis, shared by all entries.
  std::vector<KineticField> speed;

  KineticField defect(std::size_t k) const;  // w_n = h_n - h_reference
};

/// Solves every ladder member to t_final (members run concurrently on
/// scenario.jobs threads). Failures are rethrown naming the offending n.
SequenceRun run_sequence(const Scenario& scenario);

struct ConvergenceRow {
  int n;
  int m;
  double value;
};

struct ConvergenceTable {
  std::string name;
  std::vector<ConvergenceRow> rows;
  bool verdict = false;
};

/// True iff the last value is at most 0.5 x the first and each value is at
/// most 1.1 x its predecessor.
bool cauchy_verdict(const std::vector<double>& values);

/// L^1(window) distances of velocity averages of consecutive ladder members.
ConvergenceTable cauchy_l1_metric(const SequenceRun& run, const AveragingWeight& weight);

/// The template with f independent of lambda (constant speed `speed` along e_1),
/// a = 0 and the oscillating ladder; returns its sequence.
Scenario degenerate_scenario(const Scenario& tmpl, double speed);
SequenceRun degenerate_control(const Scenario& tmpl, double speed);

struct CommutatorRow {
  int n;
  double l2;
  double l4;
};

struct CommutatorTable {
  std::vector<CommutatorRow> rows;
  bool verdict = false;  // L^2 value at the largest n <= 0.25 x value at the smallest n
};

/// ||b A(v_n) - A(b v_n)|| for v_n = sin(2 pi n x_1 / L) window(x).
CommutatorTable commutator_decay_experiment(const Symbol& symbol, const RealField& b, double lambda,
                                            const std::vector<int>& ns, const RealField& window);

struct MuExperiment {
  DefectReport report;
  std::vector<std::pair<std::string, double>> ratios;  // |mu| at last n / |mu| at first n per test
};

/// v_n = window (sgn(\int rho w_n dl) - V) with V the mean of the sgn fields over
/// the non-reference members; tabulates mu_estimate and its bound.
MuExperiment mu_vanishing_experiment(const SequenceRun& run, const std::vector<TestSpec>& tests);

/// The four pairings of the kinetic equation
///   div(f h) - D^2 : (a h) = d_l G + div P
/// with theta = rho(l) conj(A_m(phi v)), m = conj(psi(pi)) / (|xi| + <a xi, xi>):
///   transport = \int\int f h . grad theta,  diffusion = \int\int h a : D^2 theta,
///   entropy   = \int\int G d_l theta,        source    = \int\int P . grad theta,
/// with entropy + source - transport - diffusion = 0 for an exact solution.
struct WeakFormTerms {
  Complex transport;
  Complex diffusion;
  Complex entropy;
  Complex source;
  Complex residual;
  double scale = 0.0;  // largest modulus of the four terms
};

struct WeakFormInput {
  const KineticField* h;
  const KineticField* entropy_terms;
  const std::vector<KineticField>* speed;
  const std::vector<KineticField>* source;  // may be empty
  const DiffusionMatrix* diffusion;
};

/// rho must vanish at both ends of the velocity interval.
WeakFormTerms weak_form_terms(const WeakFormInput& input, const TestSpec& test, const RealField& v,
                              int jobs = 1);

struct WeakFormRow {
  int n;
  std::string test_id;
  WeakFormTerms terms;
};

struct WeakFormTable {
  std::vector<WeakFormRow> rows;
  bool verdict = false;  // |residual| <= 8 (dx / L) scale on every row
};

WeakFormTable weak_form_residual(const SequenceRun& run, const std::vector<TestSpec>& tests,
                                 const std::function<double(const Eigen::VectorXd&)>& v);

struct RefinementRow {
  int points;
  int lambda_nodes;
  double dx;
  double residual;  // max over tests of |residual|
};

struct RefinementStudy {
  std::vector<RefinementRow> rows;
  double order = 0.0;  // least-squares slope of log residual against log dx
  bool verdict = false;  // order >= 1
};

/// Re-runs ladder member n of the scenario on each (points, lambda_nodes) pair.
RefinementStudy weak_form_refinement(const Scenario& scenario, int n,
                                     const std::vector<std::pair<int, int>>& resolutions,
                                     const std::vector<TestSpec>& tests,
                                     const std::function<double(const Eigen::VectorXd&)>& v);

}  // namespace velavg
