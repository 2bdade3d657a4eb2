#pragma once

#include <functional>
#include <string>
#include <vector>

#include "velavg/grid.hpp"

namespace velavg {

/// Eigendata of a symmetric matrix a = Q^T diag(kappa) Q.
///
/// Rows of Q are eigenvectors. Eigenvalues are sorted in descending order, each
/// eigenvector has its first nonzero component positive, and repeated
/// eigenvalues get the basis obtained by orthonormalising the projections of
/// e_1, e_2, ... onto the eigenspace.
struct EigenData {
  Eigen::MatrixXd q;
  Eigen::VectorXd kappa;
};

/// Velocity-dependent diffusion matrix a(lambda), given either directly or
/// through a factor sigma(lambda) with a = sigma^T sigma.
class DiffusionMatrix {
 public:
  using Evaluator = std::function<Eigen::MatrixXd(double)>;

  static DiffusionMatrix from_matrix(int dim, Evaluator a, std::string name = "custom");
  static DiffusionMatrix from_factor(int dim, Evaluator sigma, std::string name = "custom");

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  bool has_supplied_factor() const { return supplied_factor_; }

  Eigen::MatrixXd operator()(double lambda) const;
  /// sigma(lambda): the supplied factor, or sqrt(Lambda) Q from the eigendata.
  Eigen::MatrixXd factor(double lambda) const;
  double quadratic_form(double lambda, const Eigen::VectorXd& xi) const;

 private:
  DiffusionMatrix(int dim, Evaluator eval, bool factor, std::string name);

  int dim_;
  Evaluator eval_;
  bool supplied_factor_;
  std::string name_;
};

/// Throws ValidationError if a(lambda) is not symmetric.
EigenData eigendecompose(const DiffusionMatrix& a, double lambda);
EigenData eigendecompose(const Eigen::MatrixXd& a);

/// sigma = sqrt(Lambda) Q; throws ValidationError on eigenvalues below -1e-12.
Eigen::MatrixXd sigma_factor(const EigenData& e);

/// xi / (|xi| + <a xi, xi>); throws DomainError at xi = 0.
Eigen::VectorXd project(const Eigen::VectorXd& xi, const Eigen::MatrixXd& a);
Eigen::VectorXd project(const Eigen::VectorXd& xi, double lambda, const DiffusionMatrix& a);

/// Eigendata and factors tabulated once per velocity node.
struct DiffusionTable {
  LambdaGrid lambdas;
  std::vector<Eigen::MatrixXd> matrix;
  std::vector<EigenData> eigen;
  std::vector<Eigen::MatrixXd> sigma;
};
DiffusionTable tabulate(const DiffusionMatrix& a, const LambdaGrid& lambdas);

/// Checks symmetry and positive semi-definiteness at every node.
void validate(const DiffusionMatrix& a, const LambdaGrid& lambdas);

/// max over consecutive nodes of |sigma(l_{i+1}) - sigma(l_i)| / dlambda (Frobenius norm).
double factor_lipschitz_estimate(const DiffusionTable& table);

/// Builds a matrix from a textual spec:
///   zero | identity            (need `dim`)
///   eq1_6                      diag(0, |lambda|)
///   eq1_7                      [[1, -lambda], [-lambda, lambda^2]]
///   diag:<expr>,<expr>,...     diagonal entries as expressions in lambda
///   full:<expr>;<expr>;...     all d*d entries row-major
///   poly:<c0 c1 ..>;<c0 ..>;.. row-major polynomial coefficient tables in lambda
/// `dim` is required for zero/identity and checked against the specification string otherwise.
DiffusionMatrix make_diffusion(const std::string& spec, int dim = 0);

}  // namespace velavg
