#include "velavg/flux.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <memory>

#include "velavg/expression.hpp"
#include "velavg/parallel.hpp"

namespace velavg {

namespace {

using Gauss = boost::math::quadrature::gauss<double, 20>;

double bump_raw(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

double bump_mass() {
  static const double mass = [] {
    double acc = 0.0;
    for (int k = 0; k < 8; ++k) {
      const double a = -1.0 + 0.25 * k;
      acc += Gauss::integrate(bump_raw, a, a + 0.25);
    }
    return acc;
  }();
  return mass;
}

}  // namespace

double bump(double s) { return bump_raw(s) / bump_mass(); }

FluxProfile make_profile(const std::string& spec, double alpha, double beta) {
  if (!(alpha < beta)) throw ValidationError("flux bounds need alpha < beta");
  FluxProfile p;
  p.name = spec;
  if (spec == "burgers") {
    p.value = [alpha, beta](double l) { return 0.5 * (l - alpha) * (l - beta); };
    p.derivative = [alpha, beta](double l) { return l - 0.5 * (alpha + beta); };
  } else if (spec == "buckley_leverett") {
    const double width = beta - alpha;
    p.value = [alpha, width](double l) {
      const double s = (l - alpha) / width;
      return s * s / (s * s + (1.0 - s) * (1.0 - s)) - s;
    };
    p.derivative = [alpha, width](double l) {
      const double s = (l - alpha) / width;
      const double den = s * s + (1.0 - s) * (1.0 - s);
      return (2.0 * s * (1.0 - s) / (den * den) - 1.0) / width;
    };
  } else if (spec == "linear") {
    p.value = [](double l) { return l; };
    p.derivative = [](double) { return 1.0; };
  } else if (spec == "constant") {
    p.value = [](double) { return 1.0; };
    p.derivative = [](double) { return 0.0; };
  } else {
    auto expr = std::make_shared<Expression>(spec);
    const double step = 1e-5 * (beta - alpha);
    p.value = [expr](double l) { return (*expr)(l); };
    p.derivative = [expr, step](double l) {
      return ((*expr)(l + step) - (*expr)(l - step)) / (2.0 * step);
    };
  }
  return p;
}

FluxModel::FluxModel(int dim, double alpha, double beta, double length, std::vector<FluxTerm> terms,
                     std::vector<double> interfaces)
    : dim_(dim), alpha_(alpha), beta_(beta), length_(length), terms_(std::move(terms)),
      interfaces_(std::move(interfaces)) {
  if (dim_ != 1 && dim_ != 2) throw ValidationError("flux dimension must be 1 or 2");
  if (!(alpha_ < beta_)) throw ValidationError("flux bounds need alpha < beta");
  if (!(length_ > 0.0)) throw ValidationError("flux period must be positive");
  for (double& c : interfaces_) {
    c = std::fmod(c, length_);
    if (c < 0.0) c += length_;
  }
  std::sort(interfaces_.begin(), interfaces_.end());
}

bool FluxModel::x_dependent() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const FluxTerm& t) { return t.x_dependent; });
}

bool FluxModel::t_dependent() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const FluxTerm& t) { return t.t_dependent; });
}

Eigen::VectorXd FluxModel::coefficient(std::size_t term, double t, const Eigen::VectorXd& x) const {
  if (radius_ > 0.0 && terms_[term].x_dependent) return mollified_coefficient(term, t, x);
  return terms_[term].coefficient(t, x);
}

Eigen::VectorXd FluxModel::mollified_coefficient(std::size_t term, double t,
                                                 const Eigen::VectorXd& x) const {
  const Coefficient& k = terms_[term].coefficient;
  const double h = radius_;
  auto wrap = [this](double v) {
    v = std::fmod(v, length_);
    return v < 0.0 ? v + length_ : v;
  };
  // Breakpoints in the shift y where x_1 - y crosses an interface or a periodic image.
  std::vector<double> cuts{-h, h};
  for (double c : interfaces_) {
    for (int image = -2; image <= 2; ++image) {
      const double y = x[0] - (c + image * length_);
      if (y > -h && y < h) cuts.push_back(y);
    }
  }
  std::sort(cuts.begin(), cuts.end());

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim_);
  Eigen::VectorXd shifted = x;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double a = cuts[s];
    const double b = cuts[s + 1];
    if (b - a <= 0.0) continue;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < Gauss::abscissa().size(); ++i) {
      for (int sign : {-1, 1}) {
        if (Gauss::abscissa()[i] == 0.0 && sign < 0) continue;  // the centre node appears once
        const double y1 = mid + sign * half * Gauss::abscissa()[i];
        const double w1 = half * Gauss::weights()[i] * bump(y1 / h) / h;
        shifted[0] = wrap(x[0] - y1);
        if (dim_ == 1) {
          acc += w1 * k(t, shifted);
          continue;
        }
        for (std::size_t j = 0; j < Gauss::abscissa().size(); ++j) {
          for (int sign2 : {-1, 1}) {
            if (Gauss::abscissa()[j] == 0.0 && sign2 < 0) continue;
            const double y2 = sign2 * h * Gauss::abscissa()[j];
            const double w2 = h * Gauss::weights()[j] * bump(y2 / h) / h;
            shifted[1] = wrap(x[1] - y2);
            acc += w1 * w2 * k(t, shifted);
          }
        }
      }
    }
  }
  return acc;
}

Eigen::VectorXd FluxModel::flux(double t, const Eigen::VectorXd& x, double lambda) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
  for (std::size_t m = 0; m < terms_.size(); ++m) {
    out += coefficient(m, t, x) * terms_[m].profile.value(lambda);
  }
  return out;
}

Eigen::VectorXd FluxModel::derivative(double t, const Eigen::VectorXd& x, double lambda) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
  for (std::size_t m = 0; m < terms_.size(); ++m) {
    out += coefficient(m, t, x) * terms_[m].profile.derivative(lambda);
  }
  return out;
}

void FluxModel::validate(int x_samples, int lambda_samples) const {
  std::vector<Eigen::VectorXd> xs;
  for (int i = 0; i < x_samples; ++i) {
    const double c = (i + 0.5) * length_ / x_samples;
    if (dim_ == 1) {
      xs.push_back(Eigen::VectorXd::Constant(1, c));
    } else {
      for (int j = 0; j < x_samples; ++j) {
        xs.push_back((Eigen::VectorXd(2) << c, (j + 0.5) * length_ / x_samples).finished());
      }
    }
  }
  if (x_dependent()) {
    for (const auto& x : xs) {
      for (double l : {alpha_, beta_}) {
        const double v = flux(0.0, x, l).norm();
        if (!(v <= 1e-12)) {
          throw ValidationError("x-dependent flux must vanish at lambda = " + std::to_string(l) +
                                " (|F| = " + std::to_string(v) + ")");
        }
      }
    }
  }
  // Continuity of f in lambda: the largest jump between neighbouring samples
  // must shrink when the sampling is refined.
  auto largest_jump = [&](int count, const Eigen::VectorXd& x) {
    double jump = 0.0;
    double scale = 0.0;
    Eigen::VectorXd prev = derivative(0.0, x, alpha_);
    for (int j = 1; j < count; ++j) {
      const double l = alpha_ + (beta_ - alpha_) * j / (count - 1);
      const Eigen::VectorXd cur = derivative(0.0, x, l);
      if (!cur.allFinite()) throw ValidationError("flux derivative is not finite at lambda = " + std::to_string(l));
      jump = std::max(jump, (cur - prev).norm());
      scale = std::max(scale, cur.norm());
      prev = cur;
    }
    return std::make_pair(jump, scale);
  };
  for (std::size_t i = 0; i < xs.size(); i += std::max<std::size_t>(1, xs.size() / 9)) {
    const auto [coarse, scale] = largest_jump(lambda_samples, xs[i]);
    const double fine = largest_jump(2 * lambda_samples - 1, xs[i]).first;
    if (coarse > 1e-9 * std::max(1.0, scale) && fine > 0.75 * coarse) {
      throw ValidationError("flux derivative appears discontinuous in lambda");
    }
  }
}

FluxModel FluxModel::smoothed(double radius) const {
  if (!(radius >= 0.0)) throw DomainError("smoothing radius must be non-negative");
  FluxModel out = *this;
  out.radius_ = radius;
  return out;
}

std::vector<Eigen::MatrixXd> sample_coefficients(const FluxModel& flux, const SpaceGrid& grid, double t,
                                                 int jobs) {
  if (grid.dim() != flux.dim()) throw ShapeError("flux and grid dimensions differ");
  std::vector<Eigen::MatrixXd> out(flux.terms().size(), Eigen::MatrixXd(grid.size(), grid.dim()));
  for (std::size_t m = 0; m < flux.terms().size(); ++m) {
    if (!flux.terms()[m].x_dependent) {
      const Eigen::VectorXd k = flux.coefficient(m, t, grid.point(0));
      for (Index i = 0; i < grid.size(); ++i) out[m].row(i) = k.transpose();
      continue;
    }
    parallel_for(static_cast<int>(grid.size()), jobs,
                 [&](int i) { out[m].row(i) = flux.coefficient(m, t, grid.point(i)).transpose(); });
  }
  return out;
}

WaveSpeeds wave_speeds(const FluxModel& flux, const std::vector<Eigen::MatrixXd>& coefficients,
                       int lambda_samples) {
  const std::size_t terms = flux.terms().size();
  if (coefficients.size() != terms) throw ShapeError("coefficient samples do not match flux terms");
  const Index cells = terms == 0 ? 0 : coefficients.front().rows();
  const int dim = flux.dim();
  Eigen::MatrixXd slopes(lambda_samples, terms);
  for (int j = 0; j < lambda_samples; ++j) {
    const double l = flux.alpha() + (flux.beta() - flux.alpha()) * j / (lambda_samples - 1);
    for (std::size_t m = 0; m < terms; ++m) slopes(j, m) = flux.terms()[m].profile.derivative(l);
  }
  WaveSpeeds out;
  out.per_cell = Eigen::MatrixXd::Zero(cells, dim);
  Eigen::MatrixXd k(terms, dim);
  for (Index i = 0; i < cells; ++i) {
    for (std::size_t m = 0; m < terms; ++m) k.row(m) = coefficients[m].row(i);
    const Eigen::MatrixXd f = slopes * k;  // lambda_samples x dim
    out.per_cell.row(i) = f.cwiseAbs().colwise().maxCoeff();
    out.max_speed = std::max(out.max_speed, f.rowwise().norm().maxCoeff());
  }
  return out;
}

MollifiedFlux mollify_flux(const FluxModel& flux, int n, const SpaceGrid& grid, double reference_length,
                           double p, int lambda_nodes) {
  if (n < 1) throw DomainError("smoothing index must be at least 1");
  if (!(reference_length > 0.0)) throw DomainError("reference length must be positive");
  MollifiedFlux out{flux, n, std::ldexp(reference_length, -n), false, 0.0, 0.0, {}};
  if (out.radius < grid.spacing()) {
    out.warnings.push_back("smoothing radius " + std::to_string(out.radius) + " for n = " +
                           std::to_string(n) + " is below the grid spacing; clamped to " +
                           std::to_string(grid.spacing()));
    out.radius = grid.spacing();
    out.clamped = true;
  }
  out.flux = flux.smoothed(out.radius);

  const auto raw = sample_coefficients(flux, grid, 0.0);
  const auto smooth = sample_coefficients(out.flux, grid, 0.0);
  const LambdaGrid lambdas(flux.alpha(), flux.beta(), lambda_nodes);
  double flux_acc = 0.0;
  double deriv_acc = 0.0;
  double flux_max = 0.0;
  double deriv_max = 0.0;
  for (int j = 0; j < lambdas.nodes(); ++j) {
    const double l = lambdas.node(j);
    Eigen::MatrixXd df = Eigen::MatrixXd::Zero(grid.size(), grid.dim());
    Eigen::MatrixXd dd = df;
    for (std::size_t m = 0; m < raw.size(); ++m) {
      const Eigen::MatrixXd diff = smooth[m] - raw[m];
      df += diff * flux.terms()[m].profile.value(l);
      dd += diff * flux.terms()[m].profile.derivative(l);
    }
    const Eigen::ArrayXd a = df.rowwise().norm().array();
    const Eigen::ArrayXd b = dd.rowwise().norm().array();
    flux_max = std::max(flux_max, a.maxCoeff());
    deriv_max = std::max(deriv_max, b.maxCoeff());
    if (!std::isinf(p)) {
      flux_acc += lambdas.weights()[j] * a.pow(p).sum() * grid.cell_volume();
      deriv_acc += lambdas.weights()[j] * b.pow(p).sum() * grid.cell_volume();
    }
  }
  out.flux_error = std::isinf(p) ? flux_max : std::pow(flux_acc, 1.0 / p);
  out.derivative_error = std::isinf(p) ? deriv_max : std::pow(deriv_acc, 1.0 / p);
  return out;
}

}  // namespace velavg
