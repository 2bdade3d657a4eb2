#pragma once

#include <functional>
#include <string>
#include <vector>

#include "velavg/multiplier.hpp"
#include "velavg/norms.hpp"

namespace velavg {

/// Test function phi(x) psi(z, lambda) rho(lambda).
struct TestSymbol {
  std::string id;
  RealField phi;
  ProjectedSymbol psi;
  std::function<double(double)> rho;  // empty means rho = 1

  Complex fiber(const Eigen::VectorXd& z, double lambda) const;
};

/// Integrability exponents: q for the sequence, p = 2q / (q - 2) for the test
/// functions, and the exponents r, p0, r0 of the source terms.
struct ExponentProfile {
  double q = kInfinity;
  double p = 2.0;
  double r = 2.0;
  double p0 = 2.0;
  double r0 = 2.0;

  /// Throws ValidationError unless q in (2, inf], r > q / (q - 1), p0, r0 > 1.
  static ExponentProfile from_q(double q, double r = 2.0, double p0 = 2.0, double r0 = 2.0);
};

/// A frequency sample for the sup in the W^p_Pi norm. `origin_limit` samples
/// stand for xi -> 0 along `xi`, where the projection tends to xi / |xi|.
struct FrequencySample {
  Eigen::VectorXd xi;
  bool origin_limit = false;
};

/// Radii 2^k (k = min_exp..max_exp) times `angles` directions including the
/// axes, plus the origin limit along each direction. In d = 1 the directions are +-1.
std::vector<FrequencySample> frequency_samples(int dim, int min_exp = -5, int max_exp = 5,
                                               int angles = 64);

Eigen::VectorXd projected_point(const FrequencySample& s, const Eigen::MatrixXd& a);

/// ( \int [ sup_xi ( \int |sum_t phi_t psi_t(pi(xi, l), l) rho_t(l)|^2 dl )^{1/2} ]^p dx )^{1/p}
double wp_pi_norm(const std::vector<TestSymbol>& terms, double p, const DiffusionMatrix& a,
                  const LambdaGrid& lambdas, const std::vector<FrequencySample>& samples);
double wp_pi_norm(const std::vector<TestSymbol>& terms, double p, const DiffusionMatrix& a,
                  const LambdaGrid& lambdas);

/// \int\int phi rho u conj(A_{conj(psi) o pi}(v)) dx dlambda.
Complex mu_estimate(const KineticField& u, const ComplexField& v, const TestSymbol& test,
                    const DiffusionMatrix& a, int jobs = 1);
Complex mu_estimate(const KineticField& u, const RealField& v, const TestSymbol& test,
                    const DiffusionMatrix& a, int jobs = 1);

/// ||u||_{L^q_x(L^2_l)} ||v||_2 ||phi psi||_{W^p_Pi}: the bound on |mu_estimate|.
double mu_bound(const KineticField& u, const ComplexField& v, const TestSymbol& test,
                const DiffusionMatrix& a, const ExponentProfile& exponents);

/// Velocity field f(x, lambda) of a transport-diffusion equation.
using TransportField = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, double lambda)>;

/// i <f(x, l), z> + 2 pi (1 - |z|) for z in the closed unit ball.
Complex principal_symbol(const TransportField& f, const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                         double lambda);

struct NondegeneracyRow {
  Index x_index;
  Index xi_index;
  double measure;
};

struct NondegeneracyReport {
  double epsilon = 0.0;
  double max_measure = 0.0;
  Index argmax_x = 0;
  Index argmax_xi = 0;
  std::vector<NondegeneracyRow> table;
};

/// For each (x, xi): trapezoid measure of {l in K : |<f(x,l), xi>| <= eps and <a(l) xi, xi> <= eps}.
NondegeneracyReport nondegeneracy_measure(const TransportField& f, const DiffusionMatrix& a,
                                          const LambdaGrid& interval, double epsilon,
                                          const std::vector<Eigen::VectorXd>& x_samples,
                                          const std::vector<Eigen::VectorXd>& directions,
                                          int jobs = 1);

std::vector<NondegeneracyReport> nondegeneracy_ladder(const TransportField& f, const DiffusionMatrix& a,
                                                      const LambdaGrid& interval,
                                                      const std::vector<double>& epsilons,
                                                      const std::vector<Eigen::VectorXd>& x_samples,
                                                      const std::vector<Eigen::VectorXd>& directions,
                                                      int jobs = 1);

/// `count` unit vectors: +-1 in d = 1, equally spaced angles from 0 in d = 2.
std::vector<Eigen::VectorXd> unit_directions(int dim, int count);

std::vector<double> default_epsilon_ladder();

struct LocalisationVerdict {
  bool passed = false;
  double slope = 0.0;  // least-squares slope of log(measure) against log(eps), positive entries only
  std::string diagnostic;
};

/// Passes iff the measures are non-increasing and the last is at most 0.1 x the first.
LocalisationVerdict localisation_verdict(const std::vector<double>& epsilons,
                                         const std::vector<double>& measures);

struct DefectRow {
  int n;
  std::string test_id;
  Complex value;
  double bound;
};

struct DefectReport {
  std::vector<DefectRow> rows;
  std::vector<std::pair<std::string, double>> test_norms;  // W^p_Pi norm per test symbol
  bool bound_respected = true;
  bool decay_verdict = false;
};

void write_defect_csv(const std::string& path, const DefectReport& report);

}  // namespace velavg
