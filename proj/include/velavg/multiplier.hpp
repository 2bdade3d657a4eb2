#pragma once

#include <functional>

#include "velavg/diffusion.hpp"
#include "velavg/spectral.hpp"

namespace velavg {

/// Fourier symbol psi(xi, lambda) on physical frequencies xi = k / L.
///
/// `zero_mode`, when set, replaces the evaluation at xi = 0; symbols that are
/// singular at the origin must set it.
struct Symbol {
  std::function<Complex(const Eigen::VectorXd& xi, double lambda)> fn;
  std::function<Complex(double lambda)> zero_mode;

  Complex operator()(const Eigen::VectorXd& xi, double lambda) const;
};

/// Symbol of the unit ball psi(z, lambda), |z| <= 1, composed later with the projection.
using ProjectedSymbol = std::function<Complex(const Eigen::VectorXd& z, double lambda)>;

Symbol constant_symbol(Complex value);

/// xi -> psi(pi(xi, lambda), lambda), optionally conjugated. The value at xi = 0
/// is the mean of psi over the sampled unit sphere (the radial limit average).
Symbol projected_symbol(ProjectedSymbol psi, DiffusionMatrix a, bool conjugate = false);

/// Pointwise product; each factor keeps its own zero-mode convention.
Symbol operator*(const Symbol& lhs, const Symbol& rhs);

/// Symbol values sampled on the dual lattice for one lambda.
struct MultiplierPlan {
  SpaceGrid grid;
  double lambda;
  Eigen::ArrayXcd values;
};

/// Throws EvaluationError naming the lattice point if a sample is not finite.
MultiplierPlan make_plan(const Symbol& symbol, double lambda, const SpaceGrid& grid);

ComplexField apply(const MultiplierPlan& plan, const ComplexField& u);
ComplexField apply(const Symbol& symbol, double lambda, const ComplexField& u);
ComplexField apply(const Symbol& symbol, double lambda, const RealField& u);

/// Real output for real input. The plan is symmetrised to psi(k) <- (psi(k) +
/// conj(psi(-k))) / 2 so the result is exactly real; a symbol that is not
/// Hermitian away from the Nyquist modes throws EvaluationError.
RealField apply_real(const Symbol& symbol, double lambda, const RealField& u,
                     double tolerance = 1e-12);

/// Slice-wise application, lambda taken from the kinetic field's velocity grid.
ComplexKineticField apply_kinetic(const Symbol& symbol, const KineticField& u, int jobs = 1);
ComplexKineticField apply_kinetic(const Symbol& symbol, const ComplexKineticField& u, int jobs = 1);

/// b A(v) - A(b v).
ComplexField commutator(const RealField& b, const Symbol& symbol, double lambda,
                        const ComplexField& v);

/// Symbol 1 / (|xi| + <a xi, xi>) with the zero mode set to 0.
Symbol elliptic_inverse_symbol(const DiffusionMatrix& a);
ComplexField elliptic_inverse(const DiffusionMatrix& a, double lambda, const ComplexField& u);

/// Symbol |xi| + <a xi, xi> (zero at the origin); inverse of the above on mean-free fields.
Symbol elliptic_symbol(const DiffusionMatrix& a);

struct LambdaDerivative {
  double value;
  bool one_sided;  // set at the ends of the velocity grid
};

/// d/dlambda of 1 / (|xi| + <a xi, xi>) = -<a' xi, xi> / (|xi| + <a xi, xi>)^2 with a'
/// from a central difference over the velocity grid spacing (one-sided at the ends).
LambdaDerivative lambda_derivative_symbol(const DiffusionMatrix& a, const LambdaGrid& lambdas,
                                          int node, const Eigen::VectorXd& xi);

/// Same quantity written through the factor: -2 sum_j (sigma xi)_j (sigma' xi)_j / (...)^2.
LambdaDerivative lambda_derivative_symbol_factor_form(const DiffusionMatrix& a,
                                                      const LambdaGrid& lambdas, int node,
                                                      const Eigen::VectorXd& xi);

/// (2 pi i xi_k)^{1/2} times the lambda-derivative symbol (principal branch).
Symbol half_derivative_lambda_symbol(const DiffusionMatrix& a, const LambdaGrid& lambdas, int node,
                                     int axis);

/// conj( A_m (phi v) ) with m = conj(psi)(pi(xi, lambda), lambda) / (|xi| + <a xi, xi>).
ComplexField theta_test_function(const DiffusionMatrix& a, double lambda, const ProjectedSymbol& psi,
                                 const RealField& phi, const ComplexField& v);

/// Rows xi_1[, xi_2], re, im of the plan, for diagnostics.
void write_symbol_csv(const std::string& path, const MultiplierPlan& plan);

}  // namespace velavg
