#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "velavg/diffusion.hpp"
#include "velavg/symbol_analysis.hpp"

using namespace velavg;

namespace {

Eigen::VectorXd vec(double a, double b) { return (Eigen::VectorXd(2) << a, b).finished(); }

// Test-side projection and symbols, written from the formulas.
Eigen::VectorXd projection(const Eigen::VectorXd& xi, const Eigen::MatrixXd& a) {
  return xi / (xi.norm() + xi.dot(a * xi));
}

double first_order(const Eigen::VectorXd& kappa, const Eigen::VectorXd& xi) {
  return xi.norm() / (xi.norm() + (kappa.array() * xi.array().square()).sum());
}

double second_order(const Eigen::VectorXd& kappa, int m, const Eigen::VectorXd& xi) {
  return kappa[m] * xi[m] * xi[m] / (xi.norm() + (kappa.array() * xi.array().square()).sum());
}

/// Nested five-point central differences with step h along each differentiated axis.
double fd(const std::function<double(const Eigen::VectorXd&)>& fn, MultiIndex alpha, const Eigen::VectorXd& xi,
          double h) {
  int axis = -1;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (alpha[j] > 0) axis = static_cast<int>(j);
  }
  if (axis < 0) return fn(xi);
  alpha[axis] -= 1;
  auto at = [&](double s) {
    Eigen::VectorXd p = xi;
    p[axis] += s * h;
    return fd(fn, alpha, p, h);
  };
  return (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h);
}

Eigen::MatrixXd random_psd(oracle::Rng& rng, int dim) {
  Eigen::MatrixXd b(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) b(i, j) = rng.uniform();
  if (rng.uniform() < 0) b.col(dim - 1).setZero();  // rank-deficient half of the time
  return b * b.transpose();
}

}  // namespace

TEST_CASE("projection examples") {
  const auto zero = make_diffusion("zero", 2);
  const auto id = make_diffusion("identity", 2);
  const auto k17 = make_diffusion("eq1_7");
  const Eigen::VectorXd p0 = project(vec(3, 4), 0.0, zero);
  CHECK(p0[0] == 0.6);
  CHECK(p0[1] == 0.8);
  const Eigen::VectorXd p1 = project(vec(1, 0), 0.0, id);
  CHECK(p1[0] == 0.5);
  CHECK(p1[1] == 0.0);
  const Eigen::VectorXd p2 = project(vec(1, 1), 1.0, k17);
  CHECK(std::abs(p2[0] - 1 / std::sqrt(2.0)) <= 1e-12);
  CHECK(std::abs(p2[1] - 1 / std::sqrt(2.0)) <= 1e-12);
  // (1, 1) spans the kernel of [[1, -1], [-1, 1]].
  CHECK((k17(1.0) * vec(1, 1)).norm() == 0.0);
  CHECK_THROWS_AS(project(vec(0, 0), 0.0, id), DomainError);
}

TEST_CASE("projection image: sphere without diffusion, ball with it") {
  oracle::Rng rng(3);
  const auto zero = make_diffusion("zero", 2);
  const auto k17 = make_diffusion("eq1_7");
  bool interior = false;
  for (int s = 0; s < 2000; ++s) {
    const double r = std::exp2(rng.uniform(-10, 10));
    const double t = rng.uniform(0, 2 * oracle::pi());
    const double l = rng.uniform(-2, 2);
    const Eigen::VectorXd xi = vec(r * std::cos(t), r * std::sin(t));
    CHECK(std::abs(project(xi, l, zero).norm() - 1.0) <= 1e-14);
    const Eigen::VectorXd p = project(xi, l, k17);
    CHECK(p.norm() <= 1.0 + 1e-15);
    const double q = xi.dot(k17(l) * xi);
    if (q == 0.0) CHECK(std::abs(p.norm() - 1.0) <= 1e-14);
    if (q > 1e-12 * xi.squaredNorm()) CHECK(p.norm() < 1.0);
    if (r > 100 && p.norm() < 1 - 1e-3) interior = true;
  }
  CHECK(interior);
  // Exactly on the kernel direction (l, 1) of a(l) the image stays on the sphere at every scale.
  for (double r : {1e-3, 1.0, 1e3}) {
    CHECK(std::abs(project(vec(2 * r, r), 2.0, k17).norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("projection diagonalises through the eigendata") {
  oracle::Rng rng(8);
  for (int s = 0; s < 200; ++s) {
    const Eigen::MatrixXd a = random_psd(rng, 2);
    const EigenData e = eigendecompose(a);
    const Eigen::VectorXd xi = vec(rng.uniform(-5, 5), rng.uniform(-5, 5));
    const double denom = xi.norm() + (e.kappa.array() * xi.array().square()).sum();
    const Eigen::VectorXd lhs = project(e.q.transpose() * xi, a);
    const Eigen::VectorXd rhs = e.q.transpose() * (xi / denom);
    CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("eigendata conventions") {
  const EigenData e6 = eigendecompose(make_diffusion("eq1_6"), 4.0);
  CHECK(e6.kappa[0] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(std::abs(e6.kappa[1]) <= 1e-14);
  CHECK(std::abs(e6.q(0, 1) - 1.0) <= 1e-14);
  CHECK(std::abs(e6.q(1, 0) - 1.0) <= 1e-14);

  const EigenData e0 = eigendecompose(make_diffusion("zero", 2), 0.3);
  CHECK(e0.kappa.isZero(0.0));
  CHECK(e0.q.isIdentity(0.0));

  const Eigen::MatrixXd a7 = make_diffusion("eq1_7")(2.0);
  const EigenData e7 = eigendecompose(a7);
  CHECK(e7.kappa[0] == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(std::abs(e7.kappa[1]) <= 1e-13);
  CHECK((e7.q.transpose() * e7.kappa.asDiagonal() * e7.q - a7).norm() <= 1e-10);
  CHECK((e7.q * e7.q.transpose() - Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-10);
  // Rows are eigenvectors with first nonzero component positive: (1, -2) / sqrt 5 and (2, 1) / sqrt 5.
  CHECK(std::abs(e7.q(0, 0) - 1 / std::sqrt(5.0)) <= 1e-12);
  CHECK(std::abs(e7.q(0, 1) + 2 / std::sqrt(5.0)) <= 1e-12);
  CHECK(std::abs(e7.q(1, 0) - 2 / std::sqrt(5.0)) <= 1e-12);

  Eigen::MatrixXd bad(2, 2);
  bad << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(eigendecompose(bad), ValidationError);
}

TEST_CASE("sigma reconstructs a") {
  const auto k17 = make_diffusion("eq1_7");
  const LambdaGrid lambdas(-2.0, 2.0, 65);
  for (int j = 0; j < lambdas.nodes(); ++j) {
    const double l = lambdas.node(j);
    const Eigen::MatrixXd s = k17.factor(l);
    CHECK((s.transpose() * s - k17(l)).norm() <= 1e-10);
    // One row is zero and the other is +-(1, -l).
    const int big = s.row(0).norm() > s.row(1).norm() ? 0 : 1;
    CHECK(s.row(1 - big).norm() <= 1e-7);
    CHECK(std::abs(std::abs(s(big, 0)) - 1.0) <= 1e-10);
    CHECK(std::abs(s(big, 1) * (s(big, 0) > 0 ? 1 : -1) + l) <= 1e-10);
  }
  const Eigen::MatrixXd si = make_diffusion("identity", 2).factor(0.0);
  CHECK((si.transpose() * si - Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-14);
  CHECK((si * si.transpose() - Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-14);

  oracle::Rng rng(21);
  for (int s = 0; s < 100; ++s) {
    const Eigen::MatrixXd a = random_psd(rng, 2);
    const Eigen::MatrixXd f = sigma_factor(eigendecompose(a));
    CHECK((f.transpose() * f - a).norm() <= 1e-10 * std::max(1.0, a.norm()));
  }
  Eigen::MatrixXd neg(2, 2);
  neg << -1, 0, 0, 1;
  CHECK_THROWS_AS(sigma_factor(eigendecompose(neg)), ValidationError);
}

TEST_CASE("supplied factors define the matrix") {
  const auto a = DiffusionMatrix::from_factor(2, [](double l) {
    Eigen::MatrixXd s(2, 2);
    s << 0, 0, 1, -l;
    return s;
  });
  CHECK(a.has_supplied_factor());
  CHECK((a(3.0) - make_diffusion("eq1_7")(3.0)).norm() <= 1e-14);
  CHECK(a.factor(3.0)(1, 1) == -3.0);
}

TEST_CASE("matrix specs") {
  CHECK(make_diffusion("zero", 1)(2.0)(0, 0) == 0.0);
  CHECK(make_diffusion("eq1_6")(-3.0)(1, 1) == 3.0);
  CHECK(make_diffusion("diag:lambda,2*lambda", 2)(1.5)(1, 1) == 3.0);
  const Eigen::MatrixXd full = make_diffusion("full:1;lambda;lambda;4")(0.5);
  CHECK(full(0, 1) == 0.5);
  const Eigen::MatrixXd poly = make_diffusion("poly:1 0 2;0;0;3")(2.0);
  CHECK(poly(0, 0) == 9.0);
  CHECK(poly(1, 1) == 3.0);
  CHECK_THROWS_AS(make_diffusion("full:1;2;3"), ValidationError);
  CHECK_THROWS_AS(make_diffusion("diag:1,1", 3), ValidationError);
  CHECK_THROWS_AS(validate(make_diffusion("diag:-1,1"), LambdaGrid(0, 1, 5)), ValidationError);
  CHECK_THROWS_AS(validate(make_diffusion("full:1;1;0;1"), LambdaGrid(0, 1, 5)), ValidationError);
  CHECK_NOTHROW(validate(make_diffusion("eq1_7"), LambdaGrid(-2, 2, 65)));
}

TEST_CASE("factor Lipschitz estimate") {
  // sigma(l) has the single nonzero row (1, -l), so its derivative has norm 1.
  const DiffusionTable t = tabulate(make_diffusion("eq1_7"), LambdaGrid(-2, 2, 41));
  CHECK(std::abs(factor_lipschitz_estimate(t) - 1.0) <= 1e-9);
  CHECK(factor_lipschitz_estimate(tabulate(make_diffusion("identity", 2), LambdaGrid(0, 1, 9))) == 0.0);
}

TEST_CASE("Marcinkiewicz constant of trivial symbols") {
  const auto samples = dyadic_samples(2, -10, 10, 32);
  CHECK(samples.size() == 21u * 32u);
  const auto one = marcinkiewicz_constant([](const Eigen::VectorXd&) { return 1.0; }, samples, 2);
  CHECK(one.constant == 1.0);
  KappaSymbolSpec f{KappaSymbol::first_order, Eigen::VectorXd::Zero(2), 0, 1.0};
  const auto flat = marcinkiewicz_constant([&](const Eigen::VectorXd& xi) { return f(xi); }, samples, 2);
  CHECK(std::abs(flat.constant - 1.0) <= 1e-12);
}

TEST_CASE("Marcinkiewicz constant of the first-order symbol for one anisotropic kappa") {
  KappaSymbolSpec f{KappaSymbol::first_order, vec(1, 1e3), 0, 1.0};
  const auto samples = dyadic_samples(2, -10, 10, 32);
  const auto rep = marcinkiewicz_constant([&](const Eigen::VectorXd& xi) { return f(xi); }, samples, 2);
  CHECK(rep.constant <= 20.0);
  CHECK(rep.skipped == 0);
  for (const auto& xi : samples) {
    for (const auto& alpha : multi_indices(2, 2)) {
      const double rec = derivative_recursion_eval(f, alpha, xi);
      const double num = finite_difference_derivative([&](const Eigen::VectorXd& z) { return f(z); }, alpha, xi);
      // Compared on the certified quantity xi^alpha d^alpha psi.
      const double weight = std::pow(std::abs(xi[0]), alpha[0]) * std::pow(std::abs(xi[1]), alpha[1]);
      CHECK(weight * std::abs(rec - num) <= 1e-6 * std::max(1.0, weight * std::abs(rec)));
    }
  }
}

TEST_CASE("derivative recursion: base case and one-dimensional closed forms") {
  oracle::Rng rng(4);
  for (int s = 0; s < 50; ++s) {
    const double kappa = std::exp(rng.uniform(-5, 5));
    const double xi = std::exp(rng.uniform(-5, 5)) * (rng.uniform() < 0 ? -1 : 1);
    KappaSymbolSpec f{KappaSymbol::first_order, Eigen::VectorXd::Constant(1, kappa), 0, 1.0};
    const Eigen::VectorXd z = Eigen::VectorXd::Constant(1, xi);
    const double q = 1 + kappa * std::abs(xi);  // f = 1 / q
    CHECK(std::abs(derivative_recursion_eval(f, {0}, z) - 1 / q) <= 1e-12 / q);
    const double d1 = -kappa * (xi > 0 ? 1 : -1) / (q * q);
    CHECK(std::abs(derivative_recursion_eval(f, {1}, z) - d1) <= 1e-12 * std::abs(d1));
    const double d2 = 2 * kappa * kappa / (q * q * q);
    CHECK(std::abs(derivative_recursion_eval(f, {2}, z) - d2) <= 1e-12 * std::abs(d2));
  }
}

TEST_CASE("derivative recursion against test-side finite differences") {
  oracle::Rng rng(10);
  for (int s = 0; s < 300; ++s) {
    const Eigen::VectorXd kappa = vec(std::exp(rng.uniform(-3, 3)), std::exp(rng.uniform(-3, 3)));
    const double r = std::exp(rng.uniform(-2, 2));
    const double t = rng.uniform(0.2, 1.35) + (rng.integer(0, 3)) * oracle::pi() / 2;
    const Eigen::VectorXd xi = vec(r * std::cos(t), r * std::sin(t));
    const MultiIndex alpha{rng.integer(0, 2), 0};
    MultiIndex a2 = alpha;
    a2[1] = rng.integer(0, 2 - alpha[0]);
    const int m = rng.integer(0, 1);
    const KappaSymbolSpec f{KappaSymbol::first_order, kappa, 0, 1.0};
    const KappaSymbolSpec g{KappaSymbol::second_order, kappa, m, 1.0};
    const double h = 1e-3 * std::min({r, std::abs(xi[0]), std::abs(xi[1])});
    const double ff = fd([&](const Eigen::VectorXd& z) { return first_order(kappa, z); }, a2, xi, h);
    const double gg = fd([&](const Eigen::VectorXd& z) { return second_order(kappa, m, z); }, a2, xi, h);
    const double scale = std::pow(r, -double(a2[0] + a2[1]));
    CHECK(std::abs(derivative_recursion_eval(f, a2, xi) - ff) <= 1e-6 * std::max(std::abs(ff), scale));
    CHECK(std::abs(derivative_recursion_eval(g, a2, xi) - gg) <= 1e-6 * std::max(std::abs(gg), scale));
  }
}

TEST_CASE("half power symbol derivatives follow the chain rule") {
  const Eigen::VectorXd kappa = vec(2.0, 0.5);
  const KappaSymbolSpec f{KappaSymbol::first_order, kappa, 0, 0.5};
  const Eigen::VectorXd xi = vec(0.7, -1.3);
  for (const auto& alpha : multi_indices(2, 2)) {
    const double num = fd([&](const Eigen::VectorXd& z) { return std::sqrt(first_order(kappa, z)); }, alpha, xi, 1e-3);
    CHECK(std::abs(derivative_recursion_eval(f, alpha, xi) - num) <= 1e-7);
  }
}

TEST_CASE("emitted monomials satisfy the exponent side conditions") {
  for (int dim : {1, 2}) {
    for (auto kind : {KappaSymbol::first_order, KappaSymbol::second_order}) {
      for (int m = 0; m < dim; ++m) {
        for (const auto& alpha : multi_indices(dim, dim + 2)) {
          int order = 0;
          for (int v : alpha) order += v;
          for (const Monomial& mono : derivative_polynomial(kind, dim, m, alpha)) {
            int beta = 0, gamma = 0;
            for (int j = 0; j < dim; ++j) {
              CHECK(alpha[j] + mono.gamma[j] >= 2 * mono.beta[j]);
              beta += mono.beta[j];
              gamma += mono.gamma[j];
            }
            CHECK(gamma == 1 + mono.eta_power + beta);
            CHECK(mono.eta_power >= 0);
            CHECK(beta <= order + (kind == KappaSymbol::second_order ? 1 : 0));
            if (kind == KappaSymbol::second_order) CHECK(mono.beta[m] >= 1);
          }
        }
      }
    }
  }
}

TEST_CASE("monomial tables evaluate to the recursion") {
  // Independent evaluation of D^{-|alpha|-1} sum c kappa^beta xi^gamma |xi|^{-l}.
  const Eigen::VectorXd kappa = vec(3.0, 0.25);
  const Eigen::VectorXd xi = vec(-0.4, 1.1);
  const double denom = xi.norm() + (kappa.array() * xi.array().square()).sum();
  for (auto kind : {KappaSymbol::first_order, KappaSymbol::second_order}) {
    for (const auto& alpha : multi_indices(2, 3)) {
      double sum = 0.0;
      for (const Monomial& mono : derivative_polynomial(kind, 2, 1, alpha)) {
        double term = double(mono.coeff) * std::pow(xi.norm(), -mono.eta_power);
        for (int j = 0; j < 2; ++j) term *= std::pow(kappa[j], mono.beta[j]) * std::pow(xi[j], mono.gamma[j]);
        sum += term;
      }
      const double value = sum / std::pow(denom, alpha[0] + alpha[1] + 1);
      const KappaSymbolSpec spec{kind, kappa, 1, 1.0};
      CHECK(std::abs(value - derivative_recursion_eval(spec, alpha, xi)) <= 1e-12 * std::max(1.0, std::abs(value)));
    }
  }
}

TEST_CASE("kappa sweep: vanishing second-order symbol is trivial") {
  SweepOptions opt;
  opt.angles = 8;
  opt.min_exp = -3;
  opt.max_exp = 3;
  const auto rep = kappa_uniformity_sweep(KappaSymbol::second_order, {vec(0.0, 5.0), vec(1.0, 5.0)}, 1.0, 0, opt);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].trivial);
  CHECK(rep.rows[0].constant == 0.0);
  CHECK_FALSE(rep.rows[1].trivial);
  CHECK(kappa_grid(2, {0, 1, 2}).size() == 9u);
}

TEST_CASE("kappa sweep of the half-power first-order symbol is uniform") {
  SweepOptions opt;
  opt.angles = 16;
  const auto rep = kappa_uniformity_sweep(KappaSymbol::first_order, kappa_grid(2, {0, 1, 1e3, 1e6}), 0.5, 0, opt);
  CHECK(rep.uniform);
  CHECK(rep.max_constant <= 20.0);
  CHECK(rep.max_relative_gap <= 1e-6);
}

TEST_CASE("continuity modulus") {
  const VectorSymbol z1 = [](const Eigen::VectorXd& z) { return Eigen::VectorXcd::Constant(1, z[0]); };
  const VectorSymbol constant = [](const Eigen::VectorXd&) { return Eigen::VectorXcd::Constant(1, 2.0); };
  const VectorSymbol identity = [](const Eigen::VectorXd& z) -> Eigen::VectorXcd { return z.cast<Complex>(); };
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd d01 = Eigen::MatrixXd::Zero(2, 2);
  d01(1, 1) = 1.0;
  ModulusOptions opt;
  opt.angles = 512;
  for (int k = 1; k <= 10; ++k) {
    const double r = std::ldexp(1.0, k);
    CHECK(continuity_modulus(z1, zero, r, opt) <= 2.0 / r);
    CHECK(continuity_modulus(constant, d01, r, opt) == 0.0);
  }
  CHECK_THROWS_AS(continuity_modulus(z1, zero, 1.5), DomainError);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 3; k <= 10; ++k) {
    const double m = continuity_modulus(identity, d01, std::ldexp(1.0, k));
    CHECK(m <= prev);
    prev = m;
  }
}

TEST_CASE("pointwise projection modulus bound holds on random shifts") {
  oracle::Rng rng(12);
  for (int s = 0; s < 5000; ++s) {
    const Eigen::MatrixXd a = s % 3 == 0 ? make_diffusion("eq1_7")(rng.uniform(-2, 2)) : random_psd(rng, 2);
    const double r = std::exp2(rng.uniform(1, 10));
    const double t = rng.uniform(0, 2 * oracle::pi());
    const Eigen::VectorXd xi = vec(r * std::cos(t), r * std::sin(t));
    const double hr = rng.uniform(0, 1), ht = rng.uniform(0, 2 * oracle::pi());
    const Eigen::VectorXd h = vec(hr * std::cos(ht), hr * std::sin(ht));
    const double diff = (projection(xi + h, a) - projection(xi, a)).norm();
    CHECK(diff <= modulus_pointwise_bound(a, xi) * (1 + 1e-12));
  }
}
