// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "support.hpp"
#include "velavg/config.hpp"
#include "velavg/norms.hpp"
#include "velavg/spectral.hpp"

using namespace velavg;
namespace fs = std::filesystem;

namespace {

const std::string kScenarios = VELAVG_SCENARIO_DIR;

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.passed) ++failures;
  std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " | " << o.detail << " ["
            << std::setprecision(3) << secs << " s]" << std::endl;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(VELAVG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ScenarioBundle bundled(const std::string& name) {
  return build_scenario(load_config(kScenarios + "/" + name + ".ini"), {}, name);
}

ComplexField complexify(const RealField& u) { return ComplexField(u.grid(), u.values().cast<Complex>()); }

Outcome spectral_roundtrip() {
  const auto start = std::chrono::steady_clock::now();
  double roundtrip = 0.0, parseval = 0.0;
  for (const int dim : {1, 2}) {
    for (const int n : {64, 256}) {
      const SpaceGrid grid(dim, n, 1.0);
      const RealField u = oracle::random_field(grid, 17 * n + dim);
      const SpectralField s = forward_spectrum(u);
      const ComplexField back = inverse_spectrum(s);
      roundtrip = std::max(roundtrip, (back.values() - u.values().cast<Complex>()).abs().maxCoeff() / u.values().abs().maxCoeff());
      const double e = oracle::energy(u);
      parseval = std::max(parseval, std::abs(spectral_energy(s) - e) / e);
    }
  }
  const double secs = seconds_since(start);
  return {roundtrip <= 1e-12 && parseval <= 1e-12 && secs < 1.0,
          "roundtrip " + fmt(roundtrip) + ", Parseval " + fmt(parseval) + ", " + fmt(secs) + " s"};
}

Outcome projection() {
  double worst = 0.0;
  const Eigen::Vector2d xi(3.0, -4.0);
  worst = std::max(worst, (project(xi, Eigen::Matrix2d::Zero()) - xi / 5.0).norm());
  worst = std::max(worst, (project(xi, Eigen::Matrix2d::Identity()) - xi / 30.0).norm());
  Eigen::Matrix2d k;
  k << 1.0, -1.0, -1.0, 1.0;
  worst = std::max(worst, (project(Eigen::Vector2d(1.0, 1.0), 1.0, make_diffusion("eq1_7")) - Eigen::Vector2d(1.0, 1.0) / std::sqrt(2.0)).norm());

  // Closure of the image: the sphere when a = 0, the ball otherwise.
  oracle::Rng rng(2);
  double min_norm_zero = 1.0, max_norm_zero = 0.0, min_norm_full = 1.0, max_norm = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double r = std::ldexp(1.0, rng.integer(-8, 8));
    const double t = rng.uniform(0.0, 2.0 * oracle::pi());
    const Eigen::Vector2d z = r * Eigen::Vector2d(std::cos(t), std::sin(t));
    const double n0 = project(z, Eigen::Matrix2d::Zero()).norm();
    min_norm_zero = std::min(min_norm_zero, n0);
    max_norm_zero = std::max(max_norm_zero, n0);
    const double n1 = project(z, k).norm();
    max_norm = std::max(max_norm, n1);
    if (r >= 16.0 && std::abs(std::cos(t) - std::sin(t)) > 0.1) min_norm_full = std::min(min_norm_full, n1);
  }
  const bool sphere = std::abs(min_norm_zero - 1.0) <= 1e-12 && std::abs(max_norm_zero - 1.0) <= 1e-12;
  const bool ball = max_norm <= 1.0 + 1e-12 && min_norm_full < 1.0 - 1e-3;
  return {worst <= 1e-12 && sphere && ball, "example error " + fmt(worst) + ", a=0 norms in [" + fmt(min_norm_zero) + ", " +
                                                fmt(max_norm_zero) + "], a!=0 min norm " + fmt(min_norm_full)};
}

Outcome factorization() {
  double worst = 0.0;
  const DiffusionMatrix a = make_diffusion("eq1_7");
  const LambdaGrid lambdas(-2.0, 2.0, 65);
  for (int j = 0; j < lambdas.nodes(); ++j) {
    const double l = lambdas.node(j);
    const Eigen::MatrixXd s = a.factor(l);
    worst = std::max(worst, (s.transpose() * s - a(l)).norm());
  }
  oracle::Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    const int dim = rng.integer(1, 3);
    Eigen::MatrixXd m(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) m(r, c) = rng.uniform();
    const Eigen::MatrixXd psd = m.transpose() * m;
    const Eigen::MatrixXd s = sigma_factor(eigendecompose(psd));
    worst = std::max(worst, (s.transpose() * s - psd).norm());
  }
  return {worst <= 1e-10, "max |sigma^T sigma - a| " + fmt(worst)};
}

Outcome marcinkiewicz() {
  const auto start = std::chrono::steady_clock::now();
  const auto kappas = kappa_grid(2, {0.0, 1.0, 1e3, 1e6});
  std::vector<KappaSweepReport> reports;
  reports.push_back(kappa_uniformity_sweep(KappaSymbol::first_order, kappas));
  reports.push_back(kappa_uniformity_sweep(KappaSymbol::second_order, kappas, 1.0, 0));
  reports.push_back(kappa_uniformity_sweep(KappaSymbol::second_order, kappas, 1.0, 1));
  double gap = 0.0, constant = 0.0, ratio = 0.0;
  bool uniform = true;
  for (const auto& r : reports) {
    gap = std::max(gap, r.max_relative_gap);
    constant = std::max(constant, r.max_constant);
    ratio = std::max(ratio, r.ratio);
    uniform = uniform && r.uniform;
  }
  const double secs = seconds_since(start);
  return {gap <= 1e-6 && constant <= 20.0 && ratio <= 4.0 && uniform && secs < 60.0,
          "gap " + fmt(gap) + ", max constant " + fmt(constant) + ", ratio " + fmt(ratio) + ", " + fmt(secs) + " s"};
}

Outcome continuity() {
  Eigen::Matrix2d a;
  a << 0.0, 0.0, 0.0, 1.0;
  const VectorSymbol identity = [](const Eigen::VectorXd& z) { return Eigen::VectorXcd(z.cast<Complex>()); };
  std::vector<double> logr, logm;
  bool monotone = true;
  double prev = kInfinity;
  std::ostringstream values;
  for (int k = 3; k <= 10; ++k) {
    const double m = continuity_modulus(identity, a, std::ldexp(1.0, k));
    monotone = monotone && m <= prev;
    prev = m;
    logr.push_back(std::log(std::ldexp(1.0, k)));
    logm.push_back(std::log(m));
    values << (k == 3 ? "" : " ") << fmt(m);
  }
  const double n = static_cast<double>(logr.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < logr.size(); ++i) sx += logr[i], sy += logm[i], sxx += logr[i] * logr[i], sxy += logr[i] * logm[i];
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {monotone && slope <= -0.4, "moduli " + values.str() + ", slope " + fmt(slope)};
}

Outcome commutator_decay() {
  const SpaceGrid grid(2, 256, 1.0);
  const RealField b = RealField::sample(grid, [](const Eigen::VectorXd& x) {
    return 0.5 * (1.0 + std::tanh(std::sin(2.0 * oracle::pi() * (x[0] - 0.25)) / 0.1));
  });
  const RealField window = RealField::sample(grid, [](const Eigen::VectorXd& x) {
    return std::pow(std::sin(oracle::pi() * x[0]) * std::sin(oracle::pi() * x[1]), 2);
  });
  const Symbol riesz{[](const Eigen::VectorXd& xi, double) { return Complex(xi[0] / xi.norm(), 0.0); },
                     [](double) { return Complex(0.0); }};
  const Symbol projected = projected_symbol([](const Eigen::VectorXd& z, double) { return Complex(z[0], 0.0); }, make_diffusion("eq1_7"));
  const std::vector<int> ns{4, 8, 16, 32, 64};
  const CommutatorTable t1 = commutator_decay_experiment(riesz, b, 0.0, ns, window);
  const CommutatorTable t2 = commutator_decay_experiment(projected, b, 0.5, ns, window);
  return {t1.verdict && t2.verdict, "Riesz " + fmt(t1.rows.front().l2) + " -> " + fmt(t1.rows.back().l2) + ", projected " +
                                        fmt(t2.rows.front().l2) + " -> " + fmt(t2.rows.back().l2)};
}

Outcome elliptic_roundtrip() {
  double worst = 0.0;
  for (const std::string spec : {"zero", "identity", "eq1_7"}) {
    const SpaceGrid grid(2, 64, 1.0);
    const DiffusionMatrix a = make_diffusion(spec, 2);
    const ComplexField u = complexify(oracle::zero_mean(oracle::random_field(grid, 99)));
    for (const double l : {-1.0, 0.0, 1.0}) {
      const ComplexField back = apply(elliptic_symbol(a), l, elliptic_inverse(a, l, u));
      worst = std::max(worst, (back.values() - u.values()).abs().maxCoeff());
    }
  }
  return {worst <= 1e-10, "max error " + fmt(worst)};
}

FluxModel uniform_flux(const std::string& profile) {
  const FluxTerm term{[](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, 1.0); },
                      make_profile(profile, 0.0, 1.0), false, false};
  return FluxModel(1, 0.0, 1.0, 1.0, {term});
}

Outcome solver_physics() {
  // Conservation and maximum principle over 10^4 steps.
  const SpaceGrid small(1, 128, 1.0);
  const DiffusionMatrix weak = make_diffusion("diag:0.05*lambda", 1);
  const KineticSolver s1(uniform_flux("burgers"), CapitalDiffusion::integrate(weak, 0.0, 1.0), small);
  SolverState state{RealField::sample(small, [](const Eigen::VectorXd& x) { return 0.5 + 0.3 * std::sin(2.0 * oracle::pi() * x[0]); }), 0.0, 0.0, 0.4};
  state.dt = s1.stable_dt(0.4);
  const double mass0 = state.u.values().sum() * small.spacing();
  const double lo = state.u.values().minCoeff(), hi = state.u.values().maxCoeff();
  double drift = 0.0;
  bool bounded = true;
  for (int k = 0; k < 10000; ++k) {
    state = s1.step(state);
    drift = std::max(drift, std::abs(state.u.values().sum() * small.spacing() - mass0));
    bounded = bounded && state.u.values().minCoeff() >= lo - 1e-12 && state.u.values().maxCoeff() <= hi + 1e-12;
  }

  // Riemann problem: shock speed from the mass balance between two constant states.
  const SpaceGrid grid(1, 1024, 1.0);
  const DiffusionMatrix zero = make_diffusion("zero", 1);
  const KineticSolver s2(uniform_flux("burgers"), CapitalDiffusion::integrate(zero, 0.0, 1.0), grid);
  const double ul = 1.0, ur = 0.25, t_final = 0.2;
  SolverOptions options;
  options.t_final = t_final;
  const RunResult r = s2.run(RealField::sample(grid, [&](const Eigen::VectorXd& x) { return x[0] >= 0.25 && x[0] < 0.5 ? ul : ur; }), options);
  double mass = 0.0;
  for (Index i = 0; i < grid.size(); ++i) {
    const double x = grid.coordinate(static_cast<int>(i));
    if (x > 0.4 && x < 0.7) mass += r.final_state.u[i] * grid.spacing();
  }
  // Cell edges bounding the cells summed above.
  const double left = std::round(0.4 / grid.spacing()) * grid.spacing();
  const double right = std::round(0.7 / grid.spacing()) * grid.spacing();
  const double position = (mass - ur * right + ul * left) / (ul - ur);
  const double speed = (position - 0.5) / t_final;
  const double speed_error = std::abs(speed - 0.125) / 0.125;

  // Heat equation entropy residual.
  const DiffusionMatrix id = make_diffusion("identity", 1);
  const KineticSolver s3(uniform_flux("constant"), CapitalDiffusion::integrate(id, 0.0, 1.0), small);
  SolverOptions heat;
  heat.t_final = 0.01;
  heat.entropy_lambdas = LambdaGrid(0.0, 1.0, 65);
  const RunResult h = s3.run(RealField::sample(small, [](const Eigen::VectorXd& x) { return 0.5 + 0.3 * std::sin(2.0 * oracle::pi() * x[0]); }), heat);

  return {drift <= 1e-10 && bounded && speed_error <= 0.02 && h.min_zeta >= -1e-6,
          "drift " + fmt(drift) + ", bounds " + (bounded ? "kept" : "violated") + ", shock speed " + fmt(speed) + " (rel err " +
              fmt(speed_error) + "), heat min zeta " + fmt(h.min_zeta)};
}

Outcome kinetic_roundtrip() {
  double worst_ratio = 0.0, worst_avg = 0.0;
  for (const int m : {33, 129}) {
    const SpaceGrid grid(2, 32, 1.0);
    const LambdaGrid lambdas(-1.0, 1.0, m);
    const RealField u(grid, oracle::random_field(grid, m).values());
    const KineticField h = kinetic_lift(u, lambdas);
    const RealField back = average_reconstruct(h, lambdas.lo(), lambdas.hi());
    worst_ratio = std::max(worst_ratio, (back.values() - u.values()).abs().maxCoeff() / (lambdas.spacing() / 2.0));
    const RealField avg = velocity_avg(h, [](double) { return 1.0; });
    worst_avg = std::max(worst_avg, (avg.values() - (2.0 * u.values() - lambdas.lo() - lambdas.hi())).abs().maxCoeff() / lambdas.spacing());
  }
  return {worst_ratio <= 1.0 + 1e-12 && worst_avg <= 1.0 + 1e-12,
          "reconstruction error / (dl/2) " + fmt(worst_ratio) + ", average error / dl " + fmt(worst_avg)};
}

double closed_form_length(double c, double s, double eps) {
  if (s == 0.0) return std::abs(c) <= eps ? 1.0 : 0.0;
  double lo = (-eps - c) / s, hi = (eps - c) / s;
  if (lo > hi) std::swap(lo, hi);
  return std::max(0.0, std::min(hi, 1.0) - std::max(lo, 0.0));
}

Outcome nondegeneracy() {
  const NondegConfig c = build_nondeg(load_config(kScenarios + "/nondeg-transport.ini"), {});
  const LambdaGrid interval(0.0, 1.0, 131073);
  const auto dirs = unit_directions(2, 64);
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  const TransportField f = [](const Eigen::VectorXd&, double l) { return Eigen::Vector2d(1.0, l); };
  const auto ladder = nondegeneracy_ladder(f, make_diffusion("zero", 2), interval, eps, {Eigen::Vector2d(0.5, 0.5)}, dirs);
  double worst = 0.0;
  std::vector<double> maxima;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    double expected = 0.0;
    for (const auto& d : dirs) expected = std::max(expected, closed_form_length(d[0], d[1], eps[e]));
    worst = std::max(worst, std::abs(ladder[e].max_measure - expected) / interval.spacing());
    maxima.push_back(ladder[e].max_measure);
  }
  const LocalisationVerdict v = localisation_verdict(eps, maxima);
  const bool linear = std::abs(v.slope - 1.0) <= 0.05;

  // The same ladder from the bundled configuration with its own flux.
  const NondegOutcome configured = run_nondeg(c);

  const NondegOutcome control = run_nondeg(build_nondeg(load_config(kScenarios + "/nondeg-constant.ini"), {}));
  bool full = true;
  for (const auto& r : control.reports) full = full && std::abs(r.max_measure - 1.0) <= 1e-12;

  return {worst <= 2.0 && v.passed && linear && configured.verdict.passed && full && !control.verdict.passed,
          "max |measure - closed form| / dl " + fmt(worst) + ", slope " + fmt(v.slope) + ", control measures " +
              (full ? "all 1" : "not 1")};
}

std::string join_values(const ConvergenceTable& t) {
  std::ostringstream s;
  for (const auto& r : t.rows) s << (&r == &t.rows.front() ? "" : " ") << fmt(r.value);
  return s.str();
}

Outcome cauchy_layered() {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioBundle b = bundled("layered-buckley-leverett");
  const SequenceRun run = run_sequence(b.scenario);
  const ConvergenceTable t = cauchy_l1_metric(run, b.scenario.weights.front());
  const double secs = seconds_since(start);
  return {t.verdict && secs < 600.0 && b.scenario.grid.points() == 512 && b.scenario.lambdas.nodes() == 65,
          "distances " + join_values(t) + ", " + fmt(secs) + " s"};
}

Outcome necessity(const fs::path& scratch) {
  const ConfigMap good = load_config(kScenarios + "/oscillation-burgers.ini");
  const ConfigMap bad = load_config(kScenarios + "/degenerate-control.ini");
  const bool matched = config_diff(good, bad) == std::vector<std::string>{"flux.profile"};
  const ScenarioBundle b = build_scenario(bad, {}, "degenerate-control");
  const SequenceRun run = run_sequence(b.scenario);
  const ConvergenceTable t = cauchy_l1_metric(run, b.scenario.weights.front());
  const bool stays = t.rows.back().value >= 0.5 * t.rows.front().value;
  const int expect_fail = cli("run --config degenerate-control --expect-fail --out " + (scratch / "control").string());
  const int plain = cli("run --config degenerate-control --out " + (scratch / "control-plain").string());
  return {matched && stays && !t.verdict && expect_fail == 0 && plain == 1,
          "distances " + join_values(t) + ", verdict " + (t.verdict ? "pass" : "fail") + ", exit codes --expect-fail " +
              std::to_string(expect_fail) + " / plain " + std::to_string(plain)};
}

Outcome mu_behaviour() {
  const ScenarioBundle good = bundled("oscillation-burgers");
  const ScenarioBundle control = bundled("degenerate-control");
  const MuExperiment mg = mu_vanishing_experiment(run_sequence(good.scenario), good.scenario.tests);
  const MuExperiment mc = mu_vanishing_experiment(run_sequence(control.scenario), control.scenario.tests);
  double worst_good = 0.0, least_control = kInfinity, worst_bound = 0.0;
  for (const auto& [id, r] : mg.ratios) worst_good = std::max(worst_good, r);
  for (const auto& [id, r] : mc.ratios) least_control = std::min(least_control, r);
  for (const auto* rep : {&mg.report, &mc.report}) {
    for (const auto& row : rep->rows) worst_bound = std::max(worst_bound, std::abs(row.value) / row.bound);
  }
  return {worst_good <= 0.25 && least_control >= 0.5 && worst_bound <= 1.0 + 1e-6,
          "largest decay ratio " + fmt(worst_good) + ", smallest control ratio " + fmt(least_control) + ", max |mu| / bound " +
              fmt(worst_bound)};
}

double end_cutoff(double l) {
  const double s = (2.0 * l - 1.0) / 0.9;
  return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
}

Outcome weak_form() {
  // Manufactured kinetic solution: h = U(x) l^2, f = l, a = l, P = cos(2 pi x) l.
  const SpaceGrid grid(1, 64, 1.0);
  const LambdaGrid lambdas(0.0, 1.0, 257);
  KineticField h(grid, lambdas), g(grid, lambdas);
  std::vector<KineticField> speed{KineticField(grid, lambdas)}, source{KineticField(grid, lambdas)};
  const double w = 2.0 * oracle::pi();
  for (Index i = 0; i < grid.size(); ++i) {
    const double x = grid.coordinate(static_cast<int>(i));
    const double u = std::sin(w * x) + 0.5 * std::cos(2.0 * w * x);
    const double u1 = w * std::cos(w * x) - w * std::sin(2.0 * w * x);
    const double u2 = -w * w * std::sin(w * x) - 2.0 * w * w * std::cos(2.0 * w * x);
    for (int j = 0; j < lambdas.nodes(); ++j) {
      const double l = lambdas.node(j);
      h.values()(i, j) = u * l * l;
      speed[0].values()(i, j) = l;
      source[0].values()(i, j) = std::cos(w * x) * l;
      g.values()(i, j) = std::pow(l, 4) / 4.0 * (u1 - u2) + l * l / 2.0 * w * std::sin(w * x);
    }
  }
  const DiffusionMatrix a = make_diffusion("diag:lambda", 1);
  const WeakFormInput in{&h, &g, &speed, &source, &a};
  const RealField v = RealField::sample(grid, [&](const Eigen::VectorXd& x) { return std::cos(w * x[0]); });
  const TestSpec t{"z1", [&](const Eigen::VectorXd& x) { return 1.0 + 0.5 * std::cos(w * x[0]); },
                   [](const Eigen::VectorXd& z, double l) { return Complex(z[0] * l, 0.3); }, end_cutoff};
  const double manufactured = std::abs(weak_form_terms(in, t, v).residual);

  // Solver output of the layered scenario on three grids.
  const ScenarioBundle b = bundled("layered-buckley-leverett");
  std::vector<TestSpec> tests;
  const double lo = b.scenario.lambdas.lo(), hi = b.scenario.lambdas.hi();
  for (auto spec : b.scenario.tests) {
    const auto rho = spec.rho;
    spec.rho = [rho, lo, hi](double l) { return rho(l) * bump((2.0 * l - lo - hi) / (hi - lo)); };
    tests.push_back(spec);
  }
  const RefinementStudy study = weak_form_refinement(b.scenario, 3, {{128, 33}, {256, 65}, {512, 129}}, tests, b.weak_form_v);
  std::ostringstream rows;
  for (const auto& r : study.rows) rows << (&r == &study.rows.front() ? "" : " ") << fmt(r.residual);
  return {manufactured <= 1e-8 && study.verdict && study.order >= 1.0,
          "manufactured residual " + fmt(manufactured) + ", solver residuals " + rows.str() + ", order " + fmt(study.order)};
}

Outcome determinism(const fs::path& scratch) {
  const std::string base = "run --config burgers-smooth --seed 11 --out ";
  const fs::path a = scratch / "det-a", b = scratch / "det-b", c = scratch / "det-c";
  const int ca = cli(base + a.string());
  const int cb = cli(base + b.string());
  const int cc = cli(base + c.string() + " --jobs 4");
  if (ca != cb || ca != cc || ca > 1) return {false, "exit codes " + std::to_string(ca) + " " + std::to_string(cb) + " " + std::to_string(cc)};
  int files = 0;
  std::vector<std::string> differing;
  for (const auto& entry : fs::directory_iterator(a)) {
    const std::string name = entry.path().filename().string();
    const std::string ext = entry.path().extension().string();
    if (ext != ".csv" && ext != ".bin") continue;
    ++files;
    const std::string ref = slurp(entry.path());
    if (ref != slurp(b / name) || ref != slurp(c / name)) differing.push_back(name);
  }
  const bool same_hash = slurp(a / "manifest.txt").substr(0, 29) == slurp(c / "manifest.txt").substr(0, 29);
  return {files >= 7 && differing.empty() && same_hash,
          std::to_string(files) + " output files compared, " + std::to_string(differing.size()) + " differ, config hash " +
              (same_hash ? "identical" : "differs")};
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / ("velavg-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  criterion(1, "spectral roundtrip and Parseval", spectral_roundtrip);
  criterion(2, "adaptive projection examples and image dichotomy", projection);
  criterion(3, "factorization sigma^T sigma = a", factorization);
  criterion(4, "Marcinkiewicz kappa-uniformity", marcinkiewicz);
  criterion(5, "continuity modulus decay", continuity);
  criterion(6, "commutator decay", commutator_decay);
  criterion(7, "elliptic inverse roundtrip", elliptic_roundtrip);
  criterion(8, "solver physics", solver_physics);
  criterion(9, "kinetic lift and reconstruction", kinetic_roundtrip);
  criterion(10, "non-degeneracy ladder", nondegeneracy);
  criterion(11, "velocity-averaging Cauchy decay (layered Buckley-Leverett)", cauchy_layered);
  criterion(12, "necessity control", [&] { return necessity(scratch); });
  criterion(13, "defect functional behaviour", mu_behaviour);
  criterion(14, "weak-form identity", weak_form);
  criterion(15, "determinism across runs and job counts", [&] { return determinism(scratch); });

  fs::remove_all(scratch);
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
  return failures == 0 ? 0 : 1;
}
