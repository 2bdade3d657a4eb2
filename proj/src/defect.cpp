#include "velavg/defect.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "velavg/parallel.hpp"

namespace velavg {

Complex TestSymbol::fiber(const Eigen::VectorXd& z, double lambda) const {
  const Complex v = psi(z, lambda);
  return rho ? v * rho(lambda) : v;
}

ExponentProfile ExponentProfile::from_q(double q, double r, double p0, double r0) {
  if (!(q > 2.0)) throw ValidationError("sequence exponent q must exceed 2");
  ExponentProfile e;
  e.q = q;
  e.p = std::isinf(q) ? 2.0 : 2.0 * q / (q - 2.0);
  const double r_min = std::isinf(q) ? 1.0 : q / (q - 1.0);
  if (!(r > r_min)) throw ValidationError("mixed-space exponent r must exceed q / (q - 1)");
  if (!(p0 > 1.0) || !(r0 > 1.0)) throw ValidationError("source exponents must exceed 1");
  e.r = r;
  e.p0 = p0;
  e.r0 = r0;
  return e;
}

std::vector<FrequencySample> frequency_samples(int dim, int min_exp, int max_exp, int angles) {
  std::vector<Eigen::VectorXd> dirs = unit_directions(dim, dim == 1 ? 2 : angles);
  std::vector<FrequencySample> out;
  for (const auto& d : dirs) out.push_back({d, true});
  for (int k = min_exp; k <= max_exp; ++k) {
    for (const auto& d : dirs) out.push_back({std::ldexp(1.0, k) * d, false});
  }
  return out;
}

Eigen::VectorXd projected_point(const FrequencySample& s, const Eigen::MatrixXd& a) {
  return s.origin_limit ? Eigen::VectorXd(s.xi / s.xi.norm()) : project(s.xi, a);
}

double wp_pi_norm(const std::vector<TestSymbol>& terms, double p, const DiffusionMatrix& a,
                  const LambdaGrid& lambdas, const std::vector<FrequencySample>& samples) {
  if (!(p > 1.0)) throw DomainError("W^p_Pi norm needs p > 1");
  if (terms.empty()) return 0.0;
  const SpaceGrid& grid = terms.front().phi.grid();
  for (const auto& t : terms) {
    if (t.phi.grid() != grid) throw ShapeError("test symbols live on different grids");
  }
  const Index nt = static_cast<Index>(terms.size());
  const int m = lambdas.nodes();
  std::vector<Eigen::MatrixXd> a_at(m);
  for (int j = 0; j < m; ++j) a_at[j] = a(lambdas.node(j));

  // Gram matrix of the fibre values per frequency sample.
  std::vector<Eigen::MatrixXd> gram;
  gram.reserve(samples.size());
  for (const auto& s : samples) {
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(nt, nt);
    for (int j = 0; j < m; ++j) {
      const double l = lambdas.node(j);
      const Eigen::VectorXd z = projected_point(s, a_at[j]);
      Eigen::VectorXcd col(nt);
      for (Index t = 0; t < nt; ++t) col[t] = terms[t].fiber(z, l);
      g += lambdas.weights()[j] * col * col.adjoint();
    }
    gram.push_back(g.real());
  }
  double acc = 0.0;
  Eigen::VectorXd phi(nt);
  for (Index i = 0; i < grid.size(); ++i) {
    for (Index t = 0; t < nt; ++t) phi[t] = terms[t].phi[i];
    double best = 0.0;
    for (const auto& g : gram) best = std::max(best, phi.dot(g * phi));
    acc += std::pow(best, 0.5 * p);
  }
  return std::pow(acc * grid.cell_volume(), 1.0 / p);
}

double wp_pi_norm(const std::vector<TestSymbol>& terms, double p, const DiffusionMatrix& a,
                  const LambdaGrid& lambdas) {
  if (terms.empty()) return 0.0;
  return wp_pi_norm(terms, p, a, lambdas, frequency_samples(terms.front().phi.grid().dim()));
}

Complex mu_estimate(const KineticField& u, const ComplexField& v, const TestSymbol& test,
                    const DiffusionMatrix& a, int jobs) {
  if (u.grid() != v.grid() || u.grid() != test.phi.grid()) {
    throw ShapeError("mu estimate inputs live on different grids");
  }
  const auto& lam = u.lambdas();
  const Symbol symbol = projected_symbol(test.psi, a, true);
  const SpectralField vhat = forward_spectrum(v);
  std::vector<Complex> per_slice(lam.nodes(), 0.0);
  parallel_for(lam.nodes(), jobs, [&](int j) {
    const double l = lam.node(j);
    const double weight = lam.weights()[j] * (test.rho ? test.rho(l) : 1.0);
    if (weight == 0.0) return;
    const MultiplierPlan plan = make_plan(symbol, l, v.grid());
    SpectralField s = vhat;
    s.coefficients *= plan.values;
    const ComplexField av = inverse_spectrum(s);
    const Eigen::ArrayXcd integrand =
        (test.phi.values() * u.values().col(j)).cast<Complex>() * av.values().conjugate();
    per_slice[j] = weight * integrand.sum() * u.grid().cell_volume();
  });
  Complex total = 0.0;
  for (const Complex& c : per_slice) total += c;
  return total;
}

Complex mu_estimate(const KineticField& u, const RealField& v, const TestSymbol& test,
                    const DiffusionMatrix& a, int jobs) {
  return mu_estimate(u, ComplexField(v.grid(), v.values().cast<Complex>()), test, a, jobs);
}

double mu_bound(const KineticField& u, const ComplexField& v, const TestSymbol& test,
                const DiffusionMatrix& a, const ExponentProfile& exponents) {
  return mixed_norm(u, exponents.q) * lp_norm(v, 2.0) *
         wp_pi_norm({test}, exponents.p, a, u.lambdas());
}

Complex principal_symbol(const TransportField& f, const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                         double lambda) {
  return Complex(2.0 * std::numbers::pi * (1.0 - z.norm()), f(x, lambda).dot(z));
}

std::vector<Eigen::VectorXd> unit_directions(int dim, int count) {
  std::vector<Eigen::VectorXd> out;
  if (dim == 1) {
    out.push_back(Eigen::VectorXd::Constant(1, 1.0));
    out.push_back(Eigen::VectorXd::Constant(1, -1.0));
    return out;
  }
  if (dim != 2) throw DomainError("direction sampling is implemented for d = 1, 2");
  for (int i = 0; i < count; ++i) {
    const double t = 2.0 * std::numbers::pi * i / count;
    out.push_back((Eigen::VectorXd(2) << std::cos(t), std::sin(t)).finished());
  }
  return out;
}

NondegeneracyReport nondegeneracy_measure(const TransportField& f, const DiffusionMatrix& a,
                                          const LambdaGrid& interval, double epsilon,
                                          const std::vector<Eigen::VectorXd>& x_samples,
                                          const std::vector<Eigen::VectorXd>& directions, int jobs) {
  return nondegeneracy_ladder(f, a, interval, {epsilon}, x_samples, directions, jobs).front();
}

std::vector<NondegeneracyReport> nondegeneracy_ladder(const TransportField& f, const DiffusionMatrix& a,
                                                      const LambdaGrid& interval,
                                                      const std::vector<double>& epsilons,
                                                      const std::vector<Eigen::VectorXd>& x_samples,
                                                      const std::vector<Eigen::VectorXd>& directions,
                                                      int jobs) {
  if (x_samples.empty() || directions.empty()) throw DomainError("empty sample set");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw DomainError("epsilon must be positive");
  }
  const int m = interval.nodes();
  const Index nx = static_cast<Index>(x_samples.size());
  const Index nd = static_cast<Index>(directions.size());
  const Index ne = static_cast<Index>(epsilons.size());
  // Diffusion quadratic form per (direction, node); shared by all x samples.
  Eigen::MatrixXd diffusive(nd, m);
  for (int j = 0; j < m; ++j) {
    const Eigen::MatrixXd am = a(interval.node(j));
    for (Index k = 0; k < nd; ++k) diffusive(k, j) = directions[k].dot(am * directions[k]);
  }
  // measures(e, x * nd + k)
  Eigen::MatrixXd measures = Eigen::MatrixXd::Zero(ne, nx * nd);
  parallel_for(static_cast<int>(nx), jobs, [&](int ix) {
    const Eigen::VectorXd& x = x_samples[ix];
    Eigen::MatrixXd fv(m, f(x, interval.node(0)).size());
    for (int j = 0; j < m; ++j) fv.row(j) = f(x, interval.node(j)).transpose();
    for (Index k = 0; k < nd; ++k) {
      const Eigen::VectorXd transport = fv * directions[k];
      for (Index e = 0; e < ne; ++e) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
          if (std::abs(transport[j]) <= epsilons[e] && diffusive(k, j) <= epsilons[e]) {
            acc += interval.weights()[j];
          }
        }
        measures(e, ix * nd + k) = acc;
      }
    }
  });
  std::vector<NondegeneracyReport> out;
  for (Index e = 0; e < ne; ++e) {
    NondegeneracyReport rep;
    rep.epsilon = epsilons[e];
    for (Index ix = 0; ix < nx; ++ix) {
      for (Index k = 0; k < nd; ++k) {
        const double v = measures(e, ix * nd + k);
        rep.table.push_back({ix, k, v});
        if (v > rep.max_measure) {
          rep.max_measure = v;
          rep.argmax_x = ix;
          rep.argmax_xi = k;
        }
      }
    }
    out.push_back(std::move(rep));
  }
  return out;
}

std::vector<double> default_epsilon_ladder() { return {1e-1, 1e-2, 1e-3, 1e-4}; }

LocalisationVerdict localisation_verdict(const std::vector<double>& epsilons,
                                         const std::vector<double>& measures) {
  if (measures.size() < 3 || epsilons.size() != measures.size()) {
    throw DomainError("localisation verdict needs at least three matching epsilon rungs");
  }
  LocalisationVerdict v;
  std::ostringstream diag;
  bool monotone = true;
  for (std::size_t k = 1; k < measures.size(); ++k) {
    if (measures[k] > measures[k - 1] * (1.0 + 1e-9) + 1e-15) {
      monotone = false;
      diag << "measure increases between rungs " << k - 1 << " and " << k << "; ";
    }
  }
  const bool decayed = measures.back() <= 0.1 * measures.front();
  if (!decayed) diag << "last rung " << measures.back() << " exceeds 0.1 x first " << measures.front();
  v.passed = monotone && decayed;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t k = 0; k < measures.size(); ++k) {
    if (measures[k] <= 0.0) continue;
    const double x = std::log(epsilons[k]);
    const double y = std::log(measures[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 2) {
    const double den = count * sxx - sx * sx;
    v.slope = den != 0.0 ? (count * sxy - sx * sy) / den : 0.0;
  }
  v.diagnostic = diag.str();
  return v;
}

void write_defect_csv(const std::string& path, const DefectReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "n,test,real,imag,bound\n" << std::setprecision(17);
  for (const auto& r : report.rows) {
    out << r.n << ',' << r.test_id << ',' << r.value.real() << ',' << r.value.imag() << ','
        << r.bound << '\n';
  }
}

}  // namespace velavg
