#include "velavg/multiplier.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "velavg/parallel.hpp"

namespace velavg {

Complex Symbol::operator()(const Eigen::VectorXd& xi, double lambda) const {
  if (zero_mode && xi.isZero(0.0)) return zero_mode(lambda);
  return fn(xi, lambda);
}

Symbol constant_symbol(Complex value) {
  return {[value](const Eigen::VectorXd&, double) { return value; }, {}};
}

namespace {

std::vector<Eigen::VectorXd> unit_sphere_samples(int dim) {
  std::vector<Eigen::VectorXd> out;
  if (dim == 1) {
    out.push_back(Eigen::VectorXd::Constant(1, 1.0));
    out.push_back(Eigen::VectorXd::Constant(1, -1.0));
    return out;
  }
  for (int i = 0; i < 64; ++i) {
    const double t = 2.0 * std::numbers::pi * i / 64;
    out.push_back((Eigen::VectorXd(2) << std::cos(t), std::sin(t)).finished());
  }
  return out;
}

Index mirror(const SpaceGrid& g, Index flat) {
  const int n = g.points();
  if (g.dim() == 1) return (n - flat) % n;
  return g.flat((n - g.axis_index(flat, 0)) % n, (n - g.axis_index(flat, 1)) % n);
}

bool touches_nyquist(const SpaceGrid& g, Index flat) {
  for (int a = 0; a < g.dim(); ++a) {
    if (g.axis_index(flat, a) == g.points() / 2) return true;
  }
  return false;
}

}  // namespace

Symbol projected_symbol(ProjectedSymbol psi, DiffusionMatrix a, bool conjugate) {
  Symbol s;
  s.fn = [psi, a, conjugate](const Eigen::VectorXd& xi, double lambda) {
    const Complex v = psi(project(xi, lambda, a), lambda);
    return conjugate ? std::conj(v) : v;
  };
  const auto sphere = unit_sphere_samples(a.dim());
  s.zero_mode = [psi, sphere, conjugate](double lambda) {
    Complex acc = 0.0;
    for (const auto& z : sphere) acc += psi(z, lambda);
    acc /= static_cast<double>(sphere.size());
    return conjugate ? std::conj(acc) : acc;
  };
  return s;
}

Symbol operator*(const Symbol& lhs, const Symbol& rhs) {
  return {[lhs, rhs](const Eigen::VectorXd& xi, double lambda) {
            return lhs(xi, lambda) * rhs(xi, lambda);
          },
          {}};
}

MultiplierPlan make_plan(const Symbol& symbol, double lambda, const SpaceGrid& grid) {
  MultiplierPlan plan{grid, lambda, Eigen::ArrayXcd(grid.size())};
  for (Index i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd xi = grid.frequency(i);
    const Complex v = symbol(xi, lambda);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream msg;
      msg << "symbol is not finite at xi = (" << xi.transpose() << "), lambda = " << lambda;
      throw EvaluationError(msg.str());
    }
    plan.values[i] = v;
  }
  return plan;
}

ComplexField apply(const MultiplierPlan& plan, const ComplexField& u) {
  if (u.grid() != plan.grid) throw ShapeError("multiplier plan and field grids differ");
  SpectralField s = forward_spectrum(u);
  s.coefficients *= plan.values;
  return inverse_spectrum(s);
}

ComplexField apply(const Symbol& symbol, double lambda, const ComplexField& u) {
  return velavg::apply(make_plan(symbol, lambda, u.grid()), u);
}

ComplexField apply(const Symbol& symbol, double lambda, const RealField& u) {
  return velavg::apply(symbol, lambda, ComplexField(u.grid(), u.values().cast<Complex>()));
}

RealField apply_real(const Symbol& symbol, double lambda, const RealField& u, double tolerance) {
  MultiplierPlan plan = make_plan(symbol, lambda, u.grid());
  const auto& g = u.grid();
  const double scale = std::max(1.0, plan.values.abs().maxCoeff());
  Eigen::ArrayXcd sym(plan.values.size());
  for (Index i = 0; i < g.size(); ++i) {
    const Index m = mirror(g, i);
    const Complex partner = std::conj(plan.values[m]);
    if (!touches_nyquist(g, i) && std::abs(plan.values[i] - partner) > tolerance * scale) {
      throw EvaluationError("symbol is not Hermitian; the output of a real field is complex");
    }
    sym[i] = 0.5 * (plan.values[i] + partner);
  }
  plan.values = sym;
  return real_part_checked(velavg::apply(plan, ComplexField(g, u.values().cast<Complex>())), 1e-10);
}

namespace {

template <typename Scalar>
ComplexKineticField apply_kinetic_impl(const Symbol& symbol, const KineticFieldT<Scalar>& u,
                                       int jobs) {
  ComplexKineticField out(u.grid(), u.lambdas());
  parallel_for(u.lambdas().nodes(), jobs, [&](int j) {
    const ComplexField slice(u.grid(), u.values().col(j).template cast<Complex>());
    out.values().col(j) = velavg::apply(symbol, u.lambdas().node(j), slice).values();
  });
  return out;
}

}  // namespace

ComplexKineticField apply_kinetic(const Symbol& symbol, const KineticField& u, int jobs) {
  return apply_kinetic_impl(symbol, u, jobs);
}

ComplexKineticField apply_kinetic(const Symbol& symbol, const ComplexKineticField& u, int jobs) {
  return apply_kinetic_impl(symbol, u, jobs);
}

ComplexField commutator(const RealField& b, const Symbol& symbol, double lambda,
                        const ComplexField& v) {
  if (b.grid() != v.grid()) throw ShapeError("commutator fields live on different grids");
  const MultiplierPlan plan = make_plan(symbol, lambda, v.grid());
  const ComplexField av = velavg::apply(plan, v);
  const ComplexField bv(v.grid(), b.values().cast<Complex>() * v.values());
  const ComplexField abv = velavg::apply(plan, bv);
  return ComplexField(v.grid(), b.values().cast<Complex>() * av.values() - abv.values());
}

Symbol elliptic_inverse_symbol(const DiffusionMatrix& a) {
  return {[a](const Eigen::VectorXd& xi, double lambda) {
            return Complex(1.0 / (xi.norm() + a.quadratic_form(lambda, xi)));
          },
          [](double) { return Complex(0.0); }};
}

Symbol elliptic_symbol(const DiffusionMatrix& a) {
  return {[a](const Eigen::VectorXd& xi, double lambda) {
            return Complex(xi.norm() + a.quadratic_form(lambda, xi));
          },
          [](double) { return Complex(0.0); }};
}

ComplexField elliptic_inverse(const DiffusionMatrix& a, double lambda, const ComplexField& u) {
  return velavg::apply(elliptic_inverse_symbol(a), lambda, u);
}

namespace {

template <typename Eval>
auto lambda_difference(const Eval& eval, const LambdaGrid& lambdas, int node, bool& one_sided) {
  const int m = lambdas.nodes();
  if (node < 0 || node >= m) throw DomainError("velocity node out of range");
  one_sided = node == 0 || node == m - 1;
  if (!one_sided) {
    return ((eval(lambdas.node(node + 1)) - eval(lambdas.node(node - 1))) /
            (lambdas.node(node + 1) - lambdas.node(node - 1)))
        .eval();
  }
  const int lo = node == 0 ? 0 : m - 2;
  return ((eval(lambdas.node(lo + 1)) - eval(lambdas.node(lo))) /
          (lambdas.node(lo + 1) - lambdas.node(lo)))
      .eval();
}

}  // namespace

LambdaDerivative lambda_derivative_symbol(const DiffusionMatrix& a, const LambdaGrid& lambdas,
                                          int node, const Eigen::VectorXd& xi) {
  bool one_sided = false;
  const Eigen::MatrixXd da =
      lambda_difference([&](double l) { return a(l); }, lambdas, node, one_sided);
  const double den = xi.norm() + a.quadratic_form(lambdas.node(node), xi);
  return {-xi.dot(da * xi) / (den * den), one_sided};
}

LambdaDerivative lambda_derivative_symbol_factor_form(const DiffusionMatrix& a,
                                                      const LambdaGrid& lambdas, int node,
                                                      const Eigen::VectorXd& xi) {
  bool one_sided = false;
  const Eigen::MatrixXd dsigma =
      lambda_difference([&](double l) { return a.factor(l); }, lambdas, node, one_sided);
  const Eigen::MatrixXd sigma = a.factor(lambdas.node(node));
  const double den = xi.norm() + a.quadratic_form(lambdas.node(node), xi);
  return {-2.0 * (sigma * xi).dot(dsigma * xi) / (den * den), one_sided};
}

Symbol half_derivative_lambda_symbol(const DiffusionMatrix& a, const LambdaGrid& lambdas, int node,
                                     int axis) {
  return {[a, lambdas, node, axis](const Eigen::VectorXd& xi, double) {
            const Complex root = std::sqrt(Complex(0.0, 2.0 * std::numbers::pi * xi[axis]));
            return root * lambda_derivative_symbol(a, lambdas, node, xi).value;
          },
          [](double) { return Complex(0.0); }};
}

ComplexField theta_test_function(const DiffusionMatrix& a, double lambda, const ProjectedSymbol& psi,
                                 const RealField& phi, const ComplexField& v) {
  if (phi.grid() != v.grid()) throw ShapeError("theta inputs live on different grids");
  Symbol m;
  m.fn = [&](const Eigen::VectorXd& xi, double l) {
    const Complex p = std::conj(psi(project(xi, l, a), l));
    return p / (xi.norm() + a.quadratic_form(l, xi));
  };
  m.zero_mode = [](double) { return Complex(0.0); };
  const ComplexField w(v.grid(), phi.values().cast<Complex>() * v.values());
  ComplexField out = velavg::apply(m, lambda, w);
  out.values() = out.values().conjugate();
  return out;
}

void write_symbol_csv(const std::string& path, const MultiplierPlan& plan) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << (plan.grid.dim() == 1 ? "xi1" : "xi1,xi2") << ",re,im\n" << std::setprecision(17);
  for (Index i = 0; i < plan.grid.size(); ++i) {
    const Eigen::VectorXd xi = plan.grid.frequency(i);
    for (Index a = 0; a < xi.size(); ++a) out << xi[a] << ',';
    out << plan.values[i].real() << ',' << plan.values[i].imag() << '\n';
  }
}

}  // namespace velavg
