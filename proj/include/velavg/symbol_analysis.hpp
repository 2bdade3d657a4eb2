#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "velavg/diffusion.hpp"

namespace velavg {

/// The two model symbols in diagonal coordinates, D(xi) = |xi| + sum_j kappa_j xi_j^2:
///   first_order:   |xi| / D(xi)
///   second_order:  kappa_m xi_m^2 / D(xi)
enum class KappaSymbol { first_order, second_order };

struct KappaSymbolSpec {
  KappaSymbol kind = KappaSymbol::first_order;
  Eigen::VectorXd kappa;
  int component = 0;  // m, only used by second_order
  double power = 1.0;  // the symbol is raised to this power, in [0, 1]

  double denominator(const Eigen::VectorXd& xi) const;
  double base(const Eigen::VectorXd& xi) const;
  double operator()(const Eigen::VectorXd& xi) const;
};

using MultiIndex = std::vector<int>;

/// Term coeff * kappa^beta * xi^gamma * eta^eta_power with eta = 1/|xi|.
struct Monomial {
  std::int64_t coeff;
  MultiIndex beta;
  MultiIndex gamma;
  int eta_power;
};

/// Polynomial P_alpha with  d^alpha s(xi) = D(xi)^{-|alpha|-1} P_alpha(kappa, xi, 1/|xi|)
/// for s the base (power 1) symbol. Every emitted monomial is checked against the
/// structural bounds that make each term bounded by one; a violation throws
/// std::logic_error.
std::vector<Monomial> derivative_polynomial(KappaSymbol kind, int dim, int component,
                                            const MultiIndex& alpha);

/// d^alpha of the symbol (including its power) at xi, via the polynomial
/// recursion and, for powers other than one, the multivariate chain rule.
/// Requires |alpha| <= d + 2.
double derivative_recursion_eval(const KappaSymbolSpec& symbol, const MultiIndex& alpha,
                                 const Eigen::VectorXd& xi);

/// Nested central differences, improved by one Richardson extrapolation against
/// the half step. The step along axis j is rel_step * min(|xi|, |xi_j|), which is
/// rel_step * |xi| away from the coordinate axes.
double finite_difference_derivative(const std::function<double(const Eigen::VectorXd&)>& fn,
                                    const MultiIndex& alpha, const Eigen::VectorXd& xi,
                                    double rel_step = 1e-4);

/// All multi-indices in N_0^dim with |alpha| <= max_order, ordered by degree.
std::vector<MultiIndex> multi_indices(int dim, int max_order);

/// Points with |xi| = 2^k, k = min_exp..max_exp, and `angles` directions per radius
/// (offset by half a step so no sample lies on a coordinate axis). In d = 2,
/// `axis_refinement` > 0 adds directions at angular distance (pi / angles) 2^-j,
/// j = 1..axis_refinement, on both sides of each axis. In d = 1 the directions
/// are +1 and -1.
std::vector<Eigen::VectorXd> dyadic_samples(int dim, int min_exp, int max_exp, int angles,
                                            int axis_refinement = 0);

struct MarcinkiewiczReport {
  double constant = 0.0;
  Index samples = 0;
  Index skipped = 0;  // samples where a non-finite value was encountered
  Eigen::VectorXd worst_xi;
  MultiIndex worst_alpha;
};

/// sup over samples and |alpha| <= max_order of |xi^alpha d^alpha psi(xi)|, by
/// finite_difference_derivative with rel_step 1e-4.
MarcinkiewiczReport marcinkiewicz_constant(const std::function<double(const Eigen::VectorXd&)>& psi,
                                           const std::vector<Eigen::VectorXd>& samples,
                                           int max_order);

struct SweepOptions {
  int min_exp = -10;
  int max_exp = 10;
  int angles = 32;
  int max_order = -1;  // defaults to the dimension
  double ratio_limit = 4.0;
  /// Widen the radius range by the octaves separating 1 from each nonzero kappa
  /// so the transition scale |xi| ~ 1/kappa_j is always sampled, and refine the
  /// directions near the axes when kappa is anisotropic.
  bool cover_transition_scales = true;
};

struct KappaSweepRow {
  Eigen::VectorXd kappa;
  double constant = 0.0;            // finite-difference constant
  double recursion_constant = 0.0;  // same sup with derivatives from the recursion
  double max_relative_gap = 0.0;    // max |fd - recursion| / recursion_constant
  Index samples = 0;
  Index skipped = 0;
  bool trivial = false;  // symbol vanishes identically (second_order with kappa_m = 0)
};

struct KappaSweepReport {
  std::vector<KappaSweepRow> rows;
  double max_constant = 0.0;
  double min_constant = 0.0;  // over non-trivial rows
  double ratio = 0.0;
  double max_relative_gap = 0.0;
  bool uniform = false;  // ratio <= ratio_limit
};

KappaSweepReport kappa_uniformity_sweep(KappaSymbol kind, const std::vector<Eigen::VectorXd>& kappas,
                                        double power = 1.0, int component = 0,
                                        const SweepOptions& options = {});

/// Every combination of `values` in `dim` slots.
std::vector<Eigen::VectorXd> kappa_grid(int dim, const std::vector<double>& values);

using VectorSymbol = std::function<Eigen::VectorXcd(const Eigen::VectorXd& z)>;

struct ModulusOptions {
  int angles = 4096;
  int directions = 16;
  std::vector<double> steps = {0.25, 0.5, 1.0};
};

/// sup over |xi| = radius and the sampled shifts h of |psi(pi(xi + h)) - psi(pi(xi))|,
/// pi the projection for the fixed matrix a. Requires radius >= 2.
double continuity_modulus(const VectorSymbol& psi, const Eigen::MatrixXd& a, double radius,
                          const ModulusOptions& options = {});

/// Closed-form upper bound for |pi(xi + h) - pi(xi)| with |h| <= 1.
double modulus_pointwise_bound(const Eigen::MatrixXd& a, const Eigen::VectorXd& xi);

}  // namespace velavg
