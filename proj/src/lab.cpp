#include "velavg/lab.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>

#include "velavg/parallel.hpp"

namespace velavg {

namespace {

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

/// f(x_i, l_j) per axis for the flux as sampled on the grid.
std::vector<KineticField> speed_fields(const FluxModel& flux, const SpaceGrid& grid,
                                       const LambdaGrid& lambdas, int jobs) {
  const auto k = sample_coefficients(flux, grid, 0.0, jobs);
  std::vector<KineticField> out(grid.dim(), KineticField(grid, lambdas));
  for (int j = 0; j < lambdas.nodes(); ++j) {
    const double l = lambdas.node(j);
    for (std::size_t m = 0; m < k.size(); ++m) {
      const double slope = flux.terms()[m].profile.derivative(l);
      for (int axis = 0; axis < grid.dim(); ++axis) out[axis].values().col(j) += slope * k[m].col(axis).array();
    }
  }
  return out;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

SequenceEntry solve_member(const Scenario& sc, int n, const std::vector<KineticField>& speed, int jobs) {
  std::optional<MollifiedFlux> smoothed;
  if (sc.kind == LadderKind::mollify) smoothed = mollify_flux(sc.flux, n, sc.grid, sc.reference_length);
  const FluxModel& flux = smoothed ? smoothed->flux : sc.flux;
  const KineticSolver solver(flux, sc.capital, sc.grid, jobs);

  SolverOptions options;
  options.t_final = sc.t_final;
  options.cfl = sc.cfl;
  options.jobs = jobs;
  if (sc.track_entropy) options.entropy_lambdas = sc.lambdas;
  RunResult result = solver.run(sc.initial_data(n), options);

  SequenceEntry e{n,
                  result.final_state.u,
                  kinetic_lift(result.final_state.u, sc.lambdas),
                  solver.entropy_space_terms(result.final_state.u, sc.lambdas, sc.t_final),
                  {},
                  result.mass_drift,
                  result.min_u,
                  result.max_u,
                  result.maximum_principle,
                  result.min_zeta,
                  result.steps,
                  smoothed ? smoothed->flux_error : 0.0,
                  smoothed ? smoothed->derivative_error : 0.0,
                  smoothed ? smoothed->warnings : std::vector<std::string>{}};
  const std::vector<KineticField> own = smoothed ? speed_fields(flux, sc.grid, sc.lambdas, jobs) : speed;
  for (int axis = 0; axis < sc.grid.dim(); ++axis) {
    KineticField p(sc.grid, sc.lambdas, (speed[axis].values() - own[axis].values()) * e.h.values());
    e.source.push_back(std::move(p));
  }
  return e;
}

}  // namespace

TestSymbol TestSpec::on(const SpaceGrid& grid) const {
  return TestSymbol{id, RealField::sample(grid, phi), psi, rho};
}

RealField Scenario::initial_data(int n) const {
  const double h = smoothing_length(n);
  const bool fast = kind == LadderKind::oscillate;
  return RealField::sample(grid, [&](const Eigen::VectorXd& x) { return initial(x, fast ? x[0] / h : 0.0); });
}

KineticField SequenceRun::defect(std::size_t k) const {
  KineticField w = entries.at(k).h;
  w.values() -= entries.at(reference).h.values();
  return w;
}

SequenceRun run_sequence(const Scenario& scenario) {
  if (scenario.ladder.empty()) throw ValidationError("the smoothing ladder is empty");
  for (int n : scenario.ladder) {
    if (n < 1) throw ValidationError("ladder entries must be at least 1");
  }
  const int count = static_cast<int>(scenario.ladder.size());
  const int inner_jobs = std::max(1, scenario.jobs / count);
  std::vector<KineticField> speed = speed_fields(scenario.flux, scenario.grid, scenario.lambdas, scenario.jobs);

  std::vector<std::optional<SequenceEntry>> slots(count);
  parallel_for(count, scenario.jobs, [&](int k) {
    const int n = scenario.ladder[k];
    try {
      slots[k] = solve_member(scenario, n, speed, inner_jobs);
    } catch (const std::exception& error) {
      throw EvaluationError("ladder member n = " + std::to_string(n) + ": " + error.what());
    }
  });

  SequenceRun run{scenario, {}, 0, std::move(speed)};
  for (auto& s : slots) run.entries.push_back(std::move(*s));
  for (std::size_t k = 1; k < run.entries.size(); ++k) {
    if (run.entries[k].n > run.entries[run.reference].n) run.reference = k;
  }
  return run;
}

bool cauchy_verdict(const std::vector<double>& values) {
  if (values.empty()) return false;
  if (!(values.back() <= 0.5 * values.front())) return false;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (!(values[k] <= 1.1 * values[k - 1])) return false;
  }
  return true;
}

ConvergenceTable cauchy_l1_metric(const SequenceRun& run, const AveragingWeight& weight) {
  if (run.entries.size() < 2) throw DomainError("the Cauchy metric needs at least two ladder members");
  ConvergenceTable table;
  table.name = weight.name;
  std::vector<RealField> averages;
  for (const auto& e : run.entries) averages.push_back(velocity_avg(e.h, weight.rho));
  std::vector<double> values;
  for (std::size_t k = 0; k + 1 < averages.size(); ++k) {
    const double d = l1_local_distance(averages[k], averages[k + 1], run.scenario.window);
    table.rows.push_back({run.entries[k].n, run.entries[k + 1].n, d});
    values.push_back(d);
  }
  table.verdict = cauchy_verdict(values);
  return table;
}

Scenario degenerate_scenario(const Scenario& tmpl, double speed) {
  Scenario out = tmpl;
  const int dim = tmpl.grid.dim();
  Eigen::VectorXd direction = Eigen::VectorXd::Zero(dim);
  direction[0] = speed;
  FluxTerm term{[direction](double, const Eigen::VectorXd&) { return direction; },
                make_profile("linear", tmpl.flux.alpha(), tmpl.flux.beta())};
  out.flux = FluxModel(dim, tmpl.flux.alpha(), tmpl.flux.beta(), tmpl.flux.length(), {term});
  out.diffusion = make_diffusion("zero", dim);
  out.capital = CapitalDiffusion::integrate(out.diffusion, tmpl.flux.alpha(), tmpl.flux.beta(), 2);
  out.kind = LadderKind::oscillate;
  out.name = tmpl.name + "-control";
  return out;
}

SequenceRun degenerate_control(const Scenario& tmpl, double speed) {
  return run_sequence(degenerate_scenario(tmpl, speed));
}

CommutatorTable commutator_decay_experiment(const Symbol& symbol, const RealField& b, double lambda,
                                            const std::vector<int>& ns, const RealField& window) {
  if (b.grid() != window.grid()) throw ShapeError("coefficient and window live on different grids");
  if (ns.empty()) throw DomainError("no oscillation frequencies given");
  const SpaceGrid& grid = b.grid();
  CommutatorTable table;
  for (int n : ns) {
    const ComplexField v = ComplexField::sample(grid, [&](const Eigen::VectorXd& x) {
      return Complex(std::sin(2.0 * std::numbers::pi * n * x[0] / grid.length()), 0.0);
    });
    ComplexField windowed(grid, v.values() * window.values().cast<Complex>());
    const ComplexField c = commutator(b, symbol, lambda, windowed);
    table.rows.push_back({n, lp_norm(c, 2.0), lp_norm(c, 4.0)});
  }
  table.verdict = table.rows.back().l2 <= 0.25 * table.rows.front().l2;
  return table;
}

MuExperiment mu_vanishing_experiment(const SequenceRun& run, const std::vector<TestSpec>& tests) {
  const Scenario& sc = run.scenario;
  MuExperiment out;
  std::vector<std::size_t> members;
  for (std::size_t k = 0; k < run.entries.size(); ++k) {
    if (k != run.reference) members.push_back(k);
  }
  const std::function<double(double)> rho =
      sc.weights.empty() ? std::function<double(double)>([](double) { return 1.0; }) : sc.weights.front().rho;
  const RealField window = sc.sequence_window ? RealField::sample(sc.grid, sc.sequence_window)
                                              : RealField(sc.grid, Eigen::ArrayXd::Ones(sc.grid.size()));

  std::vector<KineticField> defects;
  std::vector<Eigen::ArrayXd> signs;
  Eigen::ArrayXd mean = Eigen::ArrayXd::Zero(sc.grid.size());
  for (std::size_t k : members) {
    defects.push_back(run.defect(k));
    signs.push_back(velocity_avg(defects.back(), rho).values().unaryExpr([](double v) { return sgn(v); }));
    mean += signs.back();
  }
  if (!members.empty()) mean /= static_cast<double>(members.size());

  for (const auto& t : tests) {
    const TestSymbol symbol = t.on(sc.grid);
    out.report.test_norms.emplace_back(t.id, wp_pi_norm({symbol}, sc.exponents.p, sc.diffusion, sc.lambdas));
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    const ComplexField v(sc.grid, (window.values() * (signs[i] - mean)).cast<Complex>());
    for (const auto& t : tests) {
      const TestSymbol symbol = t.on(sc.grid);
      const Complex mu = mu_estimate(defects[i], v, symbol, sc.diffusion, sc.jobs);
      const double bound = mu_bound(defects[i], v, symbol, sc.diffusion, sc.exponents);
      out.report.rows.push_back({run.entries[members[i]].n, t.id, mu, bound});
      if (std::abs(mu) > bound * (1.0 + 1e-6)) out.report.bound_respected = false;
    }
  }
  out.report.decay_verdict = true;
  for (const auto& t : tests) {
    double first = -1.0;
    double last = 0.0;
    for (const auto& row : out.report.rows) {
      if (row.test_id != t.id) continue;
      if (first < 0.0) first = std::abs(row.value);
      last = std::abs(row.value);
    }
    const double ratio = first > 0.0 ? last / first : 0.0;
    out.ratios.emplace_back(t.id, ratio);
    if (!(ratio <= 0.25)) out.report.decay_verdict = false;
  }
  return out;
}

WeakFormTerms weak_form_terms(const WeakFormInput& input, const TestSpec& test, const RealField& v, int jobs) {
  if (!input.h || !input.entropy_terms || !input.speed || !input.diffusion) {
    throw DomainError("weak form needs the kinetic function, entropy terms, speeds and diffusion");
  }
  const KineticField& h = *input.h;
  const SpaceGrid& grid = h.grid();
  const LambdaGrid& lambdas = h.lambdas();
  const int d = grid.dim();
  if (input.entropy_terms->grid() != grid || input.entropy_terms->lambdas() != lambdas ||
      static_cast<int>(input.speed->size()) != d || v.grid() != grid) {
    throw ShapeError("weak form inputs live on different grids");
  }
  const bool has_source = input.source && !input.source->empty();
  if (has_source && static_cast<int>(input.source->size()) != d) throw ShapeError("source needs one field per axis");
  const double lo = lambdas.lo();
  const double hi = lambdas.hi();
  if (std::abs(test.rho(lo)) > 1e-12 || std::abs(test.rho(hi)) > 1e-12) {
    throw DomainError("the velocity weight of a weak-form test must vanish at both ends");
  }
  auto rho = [&](double l) { return l <= lo || l >= hi ? 0.0 : test.rho(l); };
  const RealField phi = RealField::sample(grid, test.phi);
  const ComplexField vc(grid, v.values().cast<Complex>());
  const DiffusionMatrix& a = *input.diffusion;
  auto theta = [&](double l) {
    const double r = rho(l);
    if (r == 0.0) return ComplexField(grid);
    ComplexField t = theta_test_function(a, l, test.psi, phi, vc);
    t.values() *= r;
    return t;
  };

  // Spectral derivative factors; the Nyquist mode is dropped from odd derivatives.
  const int half = grid.points() / 2;
  std::vector<Eigen::ArrayXcd> first(d, Eigen::ArrayXcd(grid.size()));
  std::vector<Eigen::ArrayXcd> second(d * d, Eigen::ArrayXcd(grid.size()));
  for (Index i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd xi = grid.frequency(i);
    for (int p = 0; p < d; ++p) {
      const bool nyquist_p = grid.wavenumber(grid.axis_index(i, p)) == -half;
      first[p][i] = nyquist_p ? Complex(0.0) : Complex(0.0, 2.0 * std::numbers::pi * xi[p]);
      for (int q = 0; q < d; ++q) {
        const bool nyquist_q = grid.wavenumber(grid.axis_index(i, q)) == -half;
        const bool drop = p != q && (nyquist_p || nyquist_q);
        second[p * d + q][i] = drop ? Complex(0.0) : Complex(-4.0 * std::numbers::pi * std::numbers::pi * xi[p] * xi[q]);
      }
    }
  }
  auto derivative = [&](const SpectralField& s, const Eigen::ArrayXcd& factor) {
    SpectralField t = s;
    t.coefficients *= factor;
    return inverse_spectrum(t).values();
  };

  const double delta = 1e-3 * (hi - lo);
  const double cell = grid.cell_volume();
  std::vector<std::array<Complex, 4>> per_node(lambdas.nodes(), {Complex(0), Complex(0), Complex(0), Complex(0)});
  parallel_for(lambdas.nodes(), jobs, [&](int j) {
    const double l = lambdas.node(j);
    if (rho(l) == 0.0 && rho(l - 2 * delta) == 0.0 && rho(l + 2 * delta) == 0.0) return;
    const ComplexField t0 = theta(l);
    const SpectralField spec = forward_spectrum(t0);
    const Eigen::ArrayXcd dl =
        (-theta(l + 2 * delta).values() + 8.0 * theta(l + delta).values() - 8.0 * theta(l - delta).values() +
         theta(l - 2 * delta).values()) /
        (12.0 * delta);
    const Eigen::MatrixXd am = a(l);
    const Eigen::ArrayXd hj = h.values().col(j);
    std::array<Complex, 4> acc{Complex(0), Complex(0), Complex(0), Complex(0)};
    Eigen::ArrayXcd hessian = Eigen::ArrayXcd::Zero(grid.size());
    for (int p = 0; p < d; ++p) {
      const Eigen::ArrayXcd grad = derivative(spec, first[p]);
      acc[0] += ((*input.speed)[p].values().col(j) * hj).cast<Complex>().cwiseProduct(grad).sum();
      if (has_source) acc[3] += (*input.source)[p].values().col(j).cast<Complex>().cwiseProduct(grad).sum();
      for (int q = 0; q < d; ++q) {
        if (am(p, q) != 0.0) hessian += am(p, q) * derivative(spec, second[p * d + q]);
      }
    }
    acc[1] = hj.cast<Complex>().cwiseProduct(hessian).sum();
    acc[2] = input.entropy_terms->values().col(j).cast<Complex>().cwiseProduct(dl).sum();
    for (auto& c : acc) c *= lambdas.weights()[j] * cell;
    per_node[j] = acc;
  });

  WeakFormTerms out{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  for (const auto& acc : per_node) {
    out.transport += acc[0];
    out.diffusion += acc[1];
    out.entropy += acc[2];
    out.source += acc[3];
  }
  out.residual = out.entropy + out.source - out.transport - out.diffusion;
  out.scale = std::max({std::abs(out.transport), std::abs(out.diffusion), std::abs(out.entropy), std::abs(out.source)});
  return out;
}

WeakFormTable weak_form_residual(const SequenceRun& run, const std::vector<TestSpec>& tests,
                                 const std::function<double(const Eigen::VectorXd&)>& v) {
  const Scenario& sc = run.scenario;
  const RealField vf = RealField::sample(sc.grid, v);
  WeakFormTable table;
  table.verdict = true;
  const double tolerance = 8.0 * sc.grid.spacing() / sc.grid.length();
  for (const auto& e : run.entries) {
    if (e.source.empty()) throw DomainError("ladder member n = " + std::to_string(e.n) + " has no stored sources");
    const WeakFormInput input{&e.h, &e.entropy_terms, &run.speed, &e.source, &sc.diffusion};
    for (const auto& t : tests) {
      WeakFormRow row{e.n, t.id, weak_form_terms(input, t, vf, sc.jobs)};
      if (std::abs(row.terms.residual) > tolerance * row.terms.scale) table.verdict = false;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

RefinementStudy weak_form_refinement(const Scenario& scenario, int n,
                                     const std::vector<std::pair<int, int>>& resolutions,
                                     const std::vector<TestSpec>& tests,
                                     const std::function<double(const Eigen::VectorXd&)>& v) {
  if (resolutions.size() < 2) throw DomainError("a refinement study needs at least two grids");
  RefinementStudy study;
  std::vector<double> log_dx;
  std::vector<double> log_res;
  for (const auto& [points, nodes] : resolutions) {
    Scenario sc = scenario;
    sc.grid = SpaceGrid(scenario.grid.dim(), points, scenario.grid.length());
    sc.lambdas = LambdaGrid(scenario.lambdas.lo(), scenario.lambdas.hi(), nodes);
    sc.ladder = {n};
    const WeakFormTable table = weak_form_residual(run_sequence(sc), tests, v);
    double worst = 0.0;
    for (const auto& row : table.rows) worst = std::max(worst, std::abs(row.terms.residual));
    study.rows.push_back({points, nodes, sc.grid.spacing(), worst});
    log_dx.push_back(std::log(sc.grid.spacing()));
    log_res.push_back(std::log(std::max(worst, 1e-300)));
  }
  study.order = least_squares_slope(log_dx, log_res);
  study.verdict = study.order >= 1.0;
  return study;
}

}  // namespace velavg
