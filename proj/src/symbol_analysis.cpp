#include "velavg/symbol_analysis.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace velavg {

double KappaSymbolSpec::denominator(const Eigen::VectorXd& xi) const {
  return xi.norm() + (kappa.array() * xi.array().square()).sum();
}

double KappaSymbolSpec::base(const Eigen::VectorXd& xi) const {
  const double num = kind == KappaSymbol::first_order
                         ? xi.norm()
                         : kappa[component] * xi[component] * xi[component];
  return num / denominator(xi);
}

double KappaSymbolSpec::operator()(const Eigen::VectorXd& xi) const {
  const double b = base(xi);
  return power == 1.0 ? b : std::pow(b, power);
}

namespace {

int total(const MultiIndex& m) {
  int s = 0;
  for (int v : m) s += v;
  return s;
}

// Key layout: beta (dim entries), gamma (dim entries), eta power.
using Key = std::vector<int>;
using Poly = std::map<Key, std::int64_t>;

void add_term(Poly& p, const Key& key, std::int64_t c) {
  if (c == 0) return;
  auto [it, inserted] = p.emplace(key, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) p.erase(it);
  }
}

void check_structure(KappaSymbol kind, int dim, int component, const MultiIndex& alpha,
                     const Poly& p) {
  const int a = total(alpha);
  for (const auto& [key, c] : p) {
    int beta = 0;
    int gamma = 0;
    for (int j = 0; j < dim; ++j) {
      beta += key[j];
      gamma += key[dim + j];
      if (alpha[j] + key[dim + j] < 2 * key[j]) {
        throw std::logic_error("derivative monomial violates alpha_j + gamma_j >= 2 beta_j");
      }
    }
    const int l = key[2 * dim];
    const int slack = kind == KappaSymbol::first_order ? 0 : 1;
    if (a + slack < beta) throw std::logic_error("derivative monomial has too many kappa factors");
    if (gamma != 1 + l + beta) throw std::logic_error("derivative monomial has the wrong homogeneity");
    if (l < 0) throw std::logic_error("derivative monomial has a negative eta power");
    if (kind == KappaSymbol::second_order && key[component] < 1) {
      throw std::logic_error("derivative monomial lost its kappa_m factor");
    }
  }
}

Poly differentiate(const Poly& p, int dim, int axis, int new_order) {
  Poly out;
  const std::int64_t n = new_order;
  for (const auto& [key, c] : p) {
    const int l = key[2 * dim];
    const int g_axis = key[dim + axis];
    Key k = key;
    // -(n)(xi_s eta + 2 kappa_s xi_s) P
    k[dim + axis] += 1;
    k[2 * dim] += 1;
    add_term(out, k, -n * c);
    k = key;
    k[axis] += 1;
    k[dim + axis] += 1;
    add_term(out, k, -2 * n * c);
    // (sum_j xi_j^2 eta + sum_j kappa_j xi_j^2) d_{xi_s} P
    if (g_axis > 0) {
      for (int j = 0; j < dim; ++j) {
        k = key;
        k[dim + axis] -= 1;
        k[dim + j] += 2;
        k[2 * dim] += 1;
        add_term(out, k, c * g_axis);
        k = key;
        k[dim + axis] -= 1;
        k[dim + j] += 2;
        k[j] += 1;
        add_term(out, k, c * g_axis);
      }
    }
    // -(xi_s eta^2 + sum_j kappa_j xi_s xi_j^2 eta^3) d_eta P
    if (l > 0) {
      k = key;
      k[dim + axis] += 1;
      k[2 * dim] += 1;
      add_term(out, k, -c * l);
      for (int j = 0; j < dim; ++j) {
        k = key;
        k[j] += 1;
        k[dim + axis] += 1;
        k[dim + j] += 2;
        k[2 * dim] += 2;
        add_term(out, k, -c * l);
      }
    }
  }
  return out;
}

Poly build_polynomial(KappaSymbol kind, int dim, int component, const MultiIndex& alpha) {
  Poly p;
  if (kind == KappaSymbol::first_order) {
    for (int j = 0; j < dim; ++j) {
      Key k(2 * dim + 1, 0);
      k[dim + j] = 2;
      k[2 * dim] = 1;
      add_term(p, k, 1);
    }
  } else {
    Key k(2 * dim + 1, 0);
    k[component] = 1;
    k[dim + component] = 2;
    add_term(p, k, 1);
  }
  MultiIndex reached(dim, 0);
  check_structure(kind, dim, component, reached, p);
  int order = 0;
  for (int axis = 0; axis < dim; ++axis) {
    for (int r = 0; r < alpha[axis]; ++r) {
      ++order;
      reached[axis] += 1;
      p = differentiate(p, dim, axis, order);
      check_structure(kind, dim, component, reached, p);
    }
  }
  return p;
}

const std::vector<Monomial>& cached_polynomial(KappaSymbol kind, int dim, int component,
                                               const MultiIndex& alpha) {
  static std::mutex mutex;
  static std::map<Key, std::vector<Monomial>> cache;
  Key key{static_cast<int>(kind), dim, component};
  key.insert(key.end(), alpha.begin(), alpha.end());
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, derivative_polynomial(kind, dim, component, alpha)).first;
  }
  return it->second;
}

double int_power(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

double eval_base_derivative(const KappaSymbolSpec& s, const MultiIndex& alpha,
                            const Eigen::VectorXd& xi) {
  const int dim = static_cast<int>(xi.size());
  const auto& poly = cached_polynomial(s.kind, dim, s.component, alpha);
  const double eta = 1.0 / xi.norm();
  double acc = 0.0;
  for (const auto& m : poly) {
    double term = static_cast<double>(m.coeff) * int_power(eta, m.eta_power);
    for (int j = 0; j < dim; ++j) {
      term *= int_power(s.kappa[j], m.beta[j]) * int_power(xi[j], m.gamma[j]);
    }
    acc += term;
  }
  return acc / std::pow(s.denominator(xi), total(alpha) + 1);
}

// Visits every set partition of {0..n-1}; blocks are given as lists of positions.
void for_each_partition(int n, const std::function<void(const std::vector<std::vector<int>>&)>& fn) {
  std::vector<std::vector<int>> blocks;
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      fn(blocks);
      return;
    }
    for (auto& b : blocks) {
      b.push_back(i);
      rec(i + 1);
      b.pop_back();
    }
    blocks.push_back({i});
    rec(i + 1);
    blocks.pop_back();
  };
  rec(0);
}

}  // namespace

std::vector<Monomial> derivative_polynomial(KappaSymbol kind, int dim, int component,
                                            const MultiIndex& alpha) {
  if (static_cast<int>(alpha.size()) != dim) throw ShapeError("multi-index has the wrong length");
  if (component < 0 || component >= dim) throw DomainError("symbol component out of range");
  const Poly p = build_polynomial(kind, dim, component, alpha);
  std::vector<Monomial> out;
  for (const auto& [key, c] : p) {
    Monomial m{c, MultiIndex(key.begin(), key.begin() + dim),
               MultiIndex(key.begin() + dim, key.begin() + 2 * dim), key[2 * dim]};
    out.push_back(std::move(m));
  }
  return out;
}

double derivative_recursion_eval(const KappaSymbolSpec& symbol, const MultiIndex& alpha,
                                 const Eigen::VectorXd& xi) {
  const int dim = static_cast<int>(xi.size());
  if (total(alpha) > dim + 2) throw DomainError("recursion supports |alpha| <= d + 2");
  if (symbol.power == 1.0) return eval_base_derivative(symbol, alpha, xi);
  std::vector<int> positions;
  for (int j = 0; j < dim; ++j)
    for (int r = 0; r < alpha[j]; ++r) positions.push_back(j);
  const double b = symbol.base(xi);
  const double s = symbol.power;
  if (positions.empty()) return std::pow(b, s);
  double acc = 0.0;
  for_each_partition(static_cast<int>(positions.size()), [&](const auto& blocks) {
    const int k = static_cast<int>(blocks.size());
    double falling = 1.0;
    for (int i = 0; i < k; ++i) falling *= s - i;
    double term = falling * std::pow(b, s - k);
    for (const auto& block : blocks) {
      MultiIndex sub(dim, 0);
      for (int pos : block) sub[positions[pos]] += 1;
      term *= eval_base_derivative(symbol, sub, xi);
    }
    acc += term;
  });
  return acc;
}

double finite_difference_derivative(const std::function<double(const Eigen::VectorXd&)>& fn,
                                    const MultiIndex& alpha, const Eigen::VectorXd& xi,
                                    double rel_step) {
  // Along axis j the symbols vary on the scale min(|xi|, |xi_j|).
  Eigen::VectorXd scale(xi.size());
  for (Index j = 0; j < xi.size(); ++j) {
    scale[j] = xi[j] != 0.0 ? std::min(xi.norm(), std::abs(xi[j])) : xi.norm();
  }
  auto central = [&](double factor) {
    std::function<double(const Eigen::VectorXd&, MultiIndex)> rec =
        [&](const Eigen::VectorXd& at, MultiIndex a) -> double {
      for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j] == 0) continue;
        a[j] -= 1;
        const double h = factor * scale[j];
        Eigen::VectorXd plus = at;
        Eigen::VectorXd minus = at;
        plus[j] += h;
        minus[j] -= h;
        return (rec(plus, a) - rec(minus, a)) / (2.0 * h);
      }
      return fn(at);
    };
    return rec(xi, alpha);
  };
  const double h = rel_step;
  bool any = false;
  for (int v : alpha) any = any || v > 0;
  if (!any) return fn(xi);
  // One Richardson step removes the O(h^2) term of the central difference.
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

std::vector<MultiIndex> multi_indices(int dim, int max_order) {
  std::vector<MultiIndex> out;
  for (int order = 0; order <= max_order; ++order) {
    MultiIndex cur(dim, 0);
    std::function<void(int, int)> rec = [&](int axis, int left) {
      if (axis == dim - 1) {
        cur[axis] = left;
        out.push_back(cur);
        return;
      }
      for (int v = left; v >= 0; --v) {
        cur[axis] = v;
        rec(axis + 1, left - v);
      }
    };
    rec(0, order);
  }
  return out;
}

std::vector<Eigen::VectorXd> dyadic_samples(int dim, int min_exp, int max_exp, int angles,
                                            int axis_refinement) {
  std::vector<double> thetas;
  for (int i = 0; i < angles; ++i) thetas.push_back(2.0 * std::numbers::pi * (i + 0.5) / angles);
  const double first = std::numbers::pi / angles;
  for (int axis = 0; axis < 4; ++axis) {
    const double centre = 0.5 * std::numbers::pi * axis;
    for (int j = 1; j <= axis_refinement; ++j) {
      const double offset = std::ldexp(first, -j);
      thetas.push_back(centre + offset);
      thetas.push_back(centre - offset);
    }
  }
  std::vector<Eigen::VectorXd> out;
  for (int k = min_exp; k <= max_exp; ++k) {
    const double r = std::ldexp(1.0, k);
    if (dim == 1) {
      out.push_back(Eigen::VectorXd::Constant(1, r));
      out.push_back(Eigen::VectorXd::Constant(1, -r));
      continue;
    }
    for (double t : thetas) {
      Eigen::VectorXd xi(2);
      xi << r * std::cos(t), r * std::sin(t);
      out.push_back(xi);
    }
  }
  return out;
}

MarcinkiewiczReport marcinkiewicz_constant(const std::function<double(const Eigen::VectorXd&)>& psi,
                                           const std::vector<Eigen::VectorXd>& samples,
                                           int max_order) {
  MarcinkiewiczReport rep;
  if (samples.empty()) return rep;
  const int dim = static_cast<int>(samples.front().size());
  const auto alphas = multi_indices(dim, max_order);
  for (const auto& xi : samples) {
    ++rep.samples;
    double local = 0.0;
    MultiIndex local_alpha;
    bool finite = true;
    for (const auto& alpha : alphas) {
      double mono = 1.0;
      for (int j = 0; j < dim; ++j) mono *= std::pow(xi[j], alpha[j]);
      const double v = std::abs(mono * finite_difference_derivative(psi, alpha, xi));
      if (!std::isfinite(v)) {
        finite = false;
        break;
      }
      if (v > local) {
        local = v;
        local_alpha = alpha;
      }
    }
    if (!finite) {
      ++rep.skipped;
      continue;
    }
    if (local > rep.constant || rep.worst_alpha.empty()) {
      rep.constant = std::max(rep.constant, local);
      rep.worst_xi = xi;
      rep.worst_alpha = local_alpha;
    }
  }
  return rep;
}

std::vector<Eigen::VectorXd> kappa_grid(int dim, const std::vector<double>& values) {
  std::vector<Eigen::VectorXd> out;
  Eigen::VectorXd cur(dim);
  std::function<void(int)> rec = [&](int axis) {
    if (axis == dim) {
      out.push_back(cur);
      return;
    }
    for (double v : values) {
      cur[axis] = v;
      rec(axis + 1);
    }
  };
  rec(0);
  return out;
}

KappaSweepReport kappa_uniformity_sweep(KappaSymbol kind, const std::vector<Eigen::VectorXd>& kappas,
                                        double power, int component, const SweepOptions& options) {
  KappaSweepReport rep;
  bool have_min = false;
  for (const auto& kappa : kappas) {
    const int dim = static_cast<int>(kappa.size());
    const int max_order = options.max_order < 0 ? dim : options.max_order;
    KappaSymbolSpec spec{kind, kappa, component, power};
    KappaSweepRow row;
    row.kappa = kappa;
    if (kind == KappaSymbol::second_order && kappa[component] == 0.0) {
      row.trivial = true;
      rep.rows.push_back(row);
      continue;
    }
    int lo = options.min_exp;
    int hi = options.max_exp;
    int refinement = 0;
    if (options.cover_transition_scales) {
      double kmin = INFINITY;
      double kmax = 0.0;
      for (Index j = 0; j < kappa.size(); ++j) {
        if (kappa[j] <= 0.0) continue;
        kmin = std::min(kmin, kappa[j]);
        kmax = std::max(kmax, kappa[j]);
        const int octaves = static_cast<int>(std::ceil(std::abs(std::log2(kappa[j]))));
        if (kappa[j] > 1.0) lo = std::min(lo, options.min_exp - octaves);
        if (kappa[j] < 1.0) hi = std::max(hi, options.max_exp + octaves);
      }
      // Anisotropic kappa concentrates the symbol's transition in a cone of
      // opening ~ sqrt(kappa_min / kappa_max) around the coordinate axes.
      if (kmax > 0.0) {
        refinement = static_cast<int>(std::ceil(0.5 * std::log2(kmax / kmin))) + 10;
      }
    }
    const auto samples = dyadic_samples(dim, lo, hi, options.angles, refinement);
    const auto alphas = multi_indices(dim, max_order);
    std::vector<std::pair<double, double>> pairs;
    for (const auto& xi : samples) {
      ++row.samples;
      bool finite = true;
      std::vector<std::pair<double, double>> local;
      for (const auto& alpha : alphas) {
        double mono = 1.0;
        for (int j = 0; j < dim; ++j) mono *= std::pow(xi[j], alpha[j]);
        const double fd = mono * finite_difference_derivative(spec, alpha, xi);
        const double rec = mono * derivative_recursion_eval(spec, alpha, xi);
        if (!std::isfinite(fd) || !std::isfinite(rec)) {
          finite = false;
          break;
        }
        local.emplace_back(fd, rec);
      }
      if (!finite) {
        ++row.skipped;
        continue;
      }
      for (const auto& [fd, rec] : local) {
        row.constant = std::max(row.constant, std::abs(fd));
        row.recursion_constant = std::max(row.recursion_constant, std::abs(rec));
        pairs.emplace_back(fd, rec);
      }
    }
    for (const auto& [fd, rec] : pairs) {
      if (row.recursion_constant > 0.0) {
        row.max_relative_gap =
            std::max(row.max_relative_gap, std::abs(fd - rec) / row.recursion_constant);
      }
    }
    rep.max_constant = std::max(rep.max_constant, row.constant);
    rep.min_constant = have_min ? std::min(rep.min_constant, row.constant) : row.constant;
    have_min = true;
    rep.max_relative_gap = std::max(rep.max_relative_gap, row.max_relative_gap);
    rep.rows.push_back(row);
  }
  rep.ratio = rep.min_constant > 0.0 ? rep.max_constant / rep.min_constant
                                     : (rep.max_constant > 0.0 ? INFINITY : 1.0);
  rep.uniform = have_min && rep.ratio <= options.ratio_limit;
  return rep;
}

double continuity_modulus(const VectorSymbol& psi, const Eigen::MatrixXd& a, double radius,
                          const ModulusOptions& options) {
  if (radius < 2.0) throw DomainError("continuity modulus needs radius >= 2");
  const int dim = static_cast<int>(a.rows());
  std::vector<Eigen::VectorXd> points;
  std::vector<Eigen::VectorXd> shifts;
  if (dim == 1) {
    points = {Eigen::VectorXd::Constant(1, radius), Eigen::VectorXd::Constant(1, -radius)};
    for (double s : options.steps) {
      shifts.push_back(Eigen::VectorXd::Constant(1, s));
      shifts.push_back(Eigen::VectorXd::Constant(1, -s));
    }
  } else if (dim == 2) {
    for (int i = 0; i < options.angles; ++i) {
      const double t = 2.0 * std::numbers::pi * i / options.angles;
      points.push_back((Eigen::VectorXd(2) << radius * std::cos(t), radius * std::sin(t)).finished());
    }
    for (double s : options.steps) {
      for (int k = 0; k < options.directions; ++k) {
        const double t = 2.0 * std::numbers::pi * k / options.directions;
        shifts.push_back((Eigen::VectorXd(2) << s * std::cos(t), s * std::sin(t)).finished());
      }
    }
  } else {
    throw DomainError("continuity modulus is implemented for d = 1, 2");
  }
  double best = 0.0;
  for (const auto& xi : points) {
    const Eigen::VectorXcd base = psi(project(xi, a));
    for (const auto& h : shifts) {
      best = std::max(best, (psi(project(xi + h, a)) - base).norm());
    }
  }
  return best;
}

double modulus_pointwise_bound(const Eigen::MatrixXd& a, const Eigen::VectorXd& xi) {
  const double top = std::max(0.0, eigendecompose(a).kappa[0]);
  const double q = std::max(0.0, xi.dot(a * xi));
  const double n = xi.norm();
  return (2.0 + top) / n + 2.0 * std::sqrt(top) * std::sqrt(q) / (n + q);
}

}  // namespace velavg
