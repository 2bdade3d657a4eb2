#include "velavg/diffusion.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "velavg/expression.hpp"

namespace velavg {

DiffusionMatrix::DiffusionMatrix(int dim, Evaluator eval, bool factor, std::string name)
    : dim_(dim), eval_(std::move(eval)), supplied_factor_(factor), name_(std::move(name)) {
  if (dim < 1) throw ValidationError("diffusion matrix dimension must be positive");
}

DiffusionMatrix DiffusionMatrix::from_matrix(int dim, Evaluator a, std::string name) {
  return DiffusionMatrix(dim, std::move(a), false, std::move(name));
}

DiffusionMatrix DiffusionMatrix::from_factor(int dim, Evaluator sigma, std::string name) {
  return DiffusionMatrix(dim, std::move(sigma), true, std::move(name));
}

Eigen::MatrixXd DiffusionMatrix::operator()(double lambda) const {
  Eigen::MatrixXd m = eval_(lambda);
  if (supplied_factor_) {
    if (m.cols() != dim_) throw ShapeError("factor has the wrong number of columns");
    return m.transpose() * m;
  }
  if (m.rows() != dim_ || m.cols() != dim_) throw ShapeError("diffusion matrix has wrong shape");
  return m;
}

Eigen::MatrixXd DiffusionMatrix::factor(double lambda) const {
  if (supplied_factor_) return eval_(lambda);
  return sigma_factor(eigendecompose(*this, lambda));
}

double DiffusionMatrix::quadratic_form(double lambda, const Eigen::VectorXd& xi) const {
  return xi.dot((*this)(lambda) * xi);
}

EigenData eigendecompose(const Eigen::MatrixXd& a) {
  const Index d = a.rows();
  if (a.cols() != d) throw ShapeError("eigendecomposition needs a square matrix");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("diffusion matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (a + a.transpose()));
  const Eigen::VectorXd ascending = solver.eigenvalues();
  const Eigen::MatrixXd vectors = solver.eigenvectors();

  EigenData out{Eigen::MatrixXd::Zero(d, d), Eigen::VectorXd::Zero(d)};
  const double tie = 1e-12 * scale;
  Index row = 0;
  Index k = d - 1;
  while (k >= 0) {
    // Collect the cluster of (numerically) equal eigenvalues ending at k.
    Index first = k;
    while (first > 0 && ascending[k] - ascending[first - 1] <= tie) --first;
    const Index mult = k - first + 1;
    const double value = ascending.segment(first, mult).mean();
    if (mult == 1) {
      out.q.row(row) = vectors.col(k).transpose();
      out.kappa[row] = value;
      ++row;
    } else {
      const Eigen::MatrixXd basis = vectors.middleCols(first, mult);
      const Eigen::MatrixXd proj = basis * basis.transpose();
      Index found = 0;
      for (Index e = 0; e < d && found < mult; ++e) {
        Eigen::VectorXd v = proj.col(e);
        for (Index r = row - found; r < row; ++r) v -= out.q.row(r).dot(v) * out.q.row(r).transpose();
        const double norm = v.norm();
        if (norm < 1e-8) continue;
        out.q.row(row) = (v / norm).transpose();
        out.kappa[row] = value;
        ++row;
        ++found;
      }
    }
    k = first - 1;
  }
  for (Index r = 0; r < d; ++r) {
    for (Index c = 0; c < d; ++c) {
      const double entry = out.q(r, c);
      if (std::abs(entry) > 1e-14) {
        if (entry < 0) out.q.row(r) *= -1.0;
        break;
      }
    }
  }
  return out;
}

EigenData eigendecompose(const DiffusionMatrix& a, double lambda) { return eigendecompose(a(lambda)); }

Eigen::MatrixXd sigma_factor(const EigenData& e) {
  const double scale = std::max(1.0, e.kappa.cwiseAbs().maxCoeff());
  Eigen::VectorXd root(e.kappa.size());
  for (Index i = 0; i < e.kappa.size(); ++i) {
    if (e.kappa[i] < -1e-12 * scale) {
      std::ostringstream msg;
      msg << "diffusion matrix has negative eigenvalue " << e.kappa[i];
      throw ValidationError(msg.str());
    }
    root[i] = std::sqrt(std::max(0.0, e.kappa[i]));
  }
  return root.asDiagonal() * e.q;
}

Eigen::VectorXd project(const Eigen::VectorXd& xi, const Eigen::MatrixXd& a) {
  const double norm = xi.norm();
  if (norm == 0.0) throw DomainError("projection is undefined at xi = 0");
  return xi / (norm + xi.dot(a * xi));
}

Eigen::VectorXd project(const Eigen::VectorXd& xi, double lambda, const DiffusionMatrix& a) {
  return project(xi, a(lambda));
}

DiffusionTable tabulate(const DiffusionMatrix& a, const LambdaGrid& lambdas) {
  DiffusionTable t{lambdas, {}, {}, {}};
  for (int j = 0; j < lambdas.nodes(); ++j) {
    const double l = lambdas.node(j);
    t.matrix.push_back(a(l));
    t.eigen.push_back(eigendecompose(t.matrix.back()));
    t.sigma.push_back(a.has_supplied_factor() ? a.factor(l) : sigma_factor(t.eigen.back()));
  }
  return t;
}

void validate(const DiffusionMatrix& a, const LambdaGrid& lambdas) {
  for (int j = 0; j < lambdas.nodes(); ++j) {
    const Eigen::MatrixXd m = a(lambdas.node(j));
    if (!m.allFinite()) throw ValidationError("diffusion matrix is not finite at lambda = " +
                                              std::to_string(lambdas.node(j)));
    sigma_factor(eigendecompose(m));
  }
}

double factor_lipschitz_estimate(const DiffusionTable& table) {
  double best = 0.0;
  const double dl = table.lambdas.spacing();
  for (std::size_t j = 0; j + 1 < table.sigma.size(); ++j) {
    best = std::max(best, (table.sigma[j + 1] - table.sigma[j]).norm() / dl);
  }
  return best;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

int side_from_entries(std::size_t count, const std::string& spec) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(count))));
  if (static_cast<std::size_t>(side * side) != count) {
    throw ValidationError("matrix spec '" + spec + "' does not have d*d entries");
  }
  return side;
}

void check_dim(int want, int got, const std::string& spec) {
  if (want != 0 && want != got) {
    throw ValidationError("matrix spec '" + spec + "' has dimension " + std::to_string(got) +
                          ", expected " + std::to_string(want));
  }
}

}  // namespace

DiffusionMatrix make_diffusion(const std::string& spec, int dim) {
  if (spec == "zero" || spec == "identity") {
    if (dim < 1) throw ValidationError("'" + spec + "' needs an explicit dimension");
    const bool id = spec == "identity";
    return DiffusionMatrix::from_matrix(
        dim,
        [dim, id](double) -> Eigen::MatrixXd {
          return id ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(dim, dim))
                    : Eigen::MatrixXd(Eigen::MatrixXd::Zero(dim, dim));
        },
        spec);
  }
  if (spec == "eq1_6") {
    check_dim(dim, 2, spec);
    return DiffusionMatrix::from_matrix(
        2,
        [](double l) -> Eigen::MatrixXd {
          Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
          m(1, 1) = std::abs(l);
          return m;
        },
        spec);
  }
  if (spec == "eq1_7") {
    check_dim(dim, 2, spec);
    return DiffusionMatrix::from_matrix(
        2,
        [](double l) -> Eigen::MatrixXd {
          Eigen::MatrixXd m(2, 2);
          m << 1.0, -l, -l, l * l;
          return m;
        },
        spec);
  }
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ValidationError("unknown diffusion spec '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  const std::string body = spec.substr(colon + 1);
  if (kind == "diag") {
    std::vector<Expression> entries;
    for (const auto& part : split(body, ',')) entries.emplace_back(part);
    const int d = static_cast<int>(entries.size());
    check_dim(dim, d, spec);
    return DiffusionMatrix::from_matrix(
        d,
        [entries](double l) -> Eigen::MatrixXd {
          Eigen::VectorXd diag(entries.size());
          for (std::size_t i = 0; i < entries.size(); ++i) diag[i] = entries[i](l);
          return diag.asDiagonal();
        },
        spec);
  }
  if (kind == "full") {
    std::vector<Expression> entries;
    for (const auto& part : split(body, ';')) entries.emplace_back(part);
    const int d = side_from_entries(entries.size(), spec);
    check_dim(dim, d, spec);
    return DiffusionMatrix::from_matrix(
        d,
        [entries, d](double l) -> Eigen::MatrixXd {
          Eigen::MatrixXd m(d, d);
          for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) m(r, c) = entries[r * d + c](l);
          return m;
        },
        spec);
  }
  if (kind == "poly") {
    std::vector<std::vector<double>> tables;
    for (const auto& part : split(body, ';')) {
      std::istringstream in(part);
      std::vector<double> coeffs;
      double c;
      while (in >> c) coeffs.push_back(c);
      if (!in.eof()) throw ValidationError("bad polynomial coefficients in '" + spec + "'");
      tables.push_back(coeffs);
    }
    const int d = side_from_entries(tables.size(), spec);
    check_dim(dim, d, spec);
    return DiffusionMatrix::from_matrix(
        d,
        [tables, d](double l) -> Eigen::MatrixXd {
          Eigen::MatrixXd m(d, d);
          for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) {
              double acc = 0.0;
              const auto& t = tables[r * d + c];
              for (auto it = t.rbegin(); it != t.rend(); ++it) acc = acc * l + *it;
              m(r, c) = acc;
            }
          }
          return m;
        },
        spec);
  }
  throw ValidationError("unknown diffusion spec '" + spec + "'");
}

}  // namespace velavg
