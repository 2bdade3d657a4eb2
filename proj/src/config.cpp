#include "velavg/config.hpp"

#include <algorithm>
#include <bit>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

#include "velavg/expression.hpp"
#include "velavg/parallel.hpp"

namespace velavg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& values, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_same_v<T, std::string>) {
      out += values[i];
    } else {
      out += format_number(static_cast<double>(values[i]));
    }
  }
  return out;
}

double parse_number(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "inf" || s == "infinity") return kInfinity;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError("'" + key + "' is not a number: '" + raw + "'");
  }
  return v;
}

int parse_integer(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError("'" + key + "' is not an integer: '" + raw + "'");
  }
  return v;
}

std::vector<double> parse_vector(const std::string& key, const std::string& text, int dim) {
  std::vector<double> out;
  for (const auto& part : split_list(text, ',')) out.push_back(parse_number(key, part));
  if (dim > 0 && static_cast<int>(out.size()) != dim) {
    throw ValidationError("'" + key + "' needs " + std::to_string(dim) + " components: '" + text + "'");
  }
  return out;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

ExpressionVars space_vars(const Eigen::VectorXd& x) {
  ExpressionVars vars;
  vars.x1 = x[0];
  vars.x2 = x.size() > 1 ? x[1] : 0.0;
  return vars;
}

std::function<double(const Eigen::VectorXd&)> space_function(const std::string& text) {
  auto expr = std::make_shared<Expression>(text);
  return [expr](const Eigen::VectorXd& x) { return (*expr)(space_vars(x)); };
}

std::function<double(double)> velocity_function(const std::string& text) {
  auto expr = std::make_shared<Expression>(text);
  return [expr](double lambda) { return (*expr)(lambda); };
}

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform deviate in [0, 1) drawn from a generator seeded by the run seed and
/// the bit pattern of the point, so the value does not depend on evaluation order.
double point_noise(std::uint64_t seed, const Eigen::VectorXd& x) {
  std::uint64_t key = mix(seed);
  for (Index a = 0; a < x.size(); ++a) key = mix(key ^ std::bit_cast<std::uint64_t>(x[a]));
  std::mt19937_64 gen(key);
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Cell centres of a points^dim grid on [0, length)^d, any positive count.
std::vector<Eigen::VectorXd> cell_samples(int dim, int points, double length) {
  std::vector<Eigen::VectorXd> out;
  const double h = length / points;
  for (int i = 0; i < points; ++i) {
    if (dim == 1) {
      out.push_back(Eigen::VectorXd::Constant(1, (i + 0.5) * h));
      continue;
    }
    for (int j = 0; j < points; ++j) out.push_back(Eigen::Vector2d((i + 0.5) * h, (j + 0.5) * h));
  }
  return out;
}

std::vector<Eigen::VectorXd> parse_directions(ConfigReader& reader, const std::string& key, int dim,
                                              std::size_t count) {
  const std::string fallback = join(std::vector<std::string>(count, dim == 1 ? "1" : "1,0"), ";");
  const auto parts = split_list(reader.text(key, fallback));
  if (parts.size() != count) {
    throw ValidationError("'" + key + "' lists " + std::to_string(parts.size()) + " directions for " +
                          std::to_string(count) + " flux terms");
  }
  std::vector<Eigen::VectorXd> out;
  for (const auto& p : parts) out.push_back(to_eigen(parse_vector(key, p, dim)));
  return out;
}

ConfigMap flatten(const boost::property_tree::ptree& tree) {
  ConfigMap out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      out[section] = trim(body.data());
      continue;
    }
    for (const auto& [key, value] : body) out[section + "." + key] = trim(value.data());
  }
  return out;
}

}  // namespace

ConfigMap parse_config(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  return flatten(tree);
}

ConfigMap load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<std::string> config_diff(const ConfigMap& lhs, const ConfigMap& rhs) {
  std::vector<std::string> out;
  for (const auto& [k, v] : lhs) {
    const auto it = rhs.find(k);
    if (it == rhs.end() || it->second != v) out.push_back(k);
  }
  for (const auto& [k, v] : rhs) {
    if (!lhs.count(k)) out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> split_list(const std::string& text, char separator) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, separator)) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

ConfigReader::ConfigReader(ConfigMap entries) : entries_(std::move(entries)) {}

bool ConfigReader::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string ConfigReader::text(const std::string& key, const std::string& fallback) {
  const auto it = entries_.find(key);
  const std::string value = it == entries_.end() ? fallback : it->second;
  resolved_[key] = value;
  return value;
}

std::string ConfigReader::text(const std::string& key) {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ValidationError("missing required config entry '" + key + "'");
  resolved_[key] = it->second;
  return it->second;
}

double ConfigReader::number(const std::string& key, double fallback) {
  const double v = has(key) ? parse_number(key, entries_.at(key)) : fallback;
  resolved_[key] = format_number(v);
  return v;
}

double ConfigReader::number(const std::string& key) {
  const double v = parse_number(key, text(key));
  resolved_[key] = format_number(v);
  return v;
}

int ConfigReader::integer(const std::string& key, int fallback) {
  const int v = has(key) ? parse_integer(key, entries_.at(key)) : fallback;
  resolved_[key] = std::to_string(v);
  return v;
}

bool ConfigReader::flag(const std::string& key, bool fallback) {
  bool v = fallback;
  if (has(key)) {
    const std::string s = trim(entries_.at(key));
    if (s == "true" || s == "yes" || s == "on" || s == "1") {
      v = true;
    } else if (s == "false" || s == "no" || s == "off" || s == "0") {
      v = false;
    } else {
      throw ValidationError("'" + key + "' is not a boolean: '" + s + "'");
    }
  }
  resolved_[key] = v ? "true" : "false";
  return v;
}

std::vector<double> ConfigReader::numbers(const std::string& key, const std::vector<double>& fallback) {
  std::vector<double> v = fallback;
  if (has(key)) {
    v.clear();
    for (const auto& part : split_list(entries_.at(key), ',')) v.push_back(parse_number(key, part));
  }
  resolved_[key] = join(v, ",");
  return v;
}

std::vector<int> ConfigReader::integers(const std::string& key, const std::vector<int>& fallback) {
  std::vector<int> v = fallback;
  if (has(key)) {
    v.clear();
    for (const auto& part : split_list(entries_.at(key), ',')) v.push_back(parse_integer(key, part));
  }
  resolved_[key] = join(v, ",");
  return v;
}

void ConfigReader::reject_unused() const {
  std::vector<std::string> unknown;
  for (const auto& [k, v] : entries_) {
    if (!resolved_.count(k)) unknown.push_back(k);
  }
  if (!unknown.empty()) throw ValidationError("unknown config entries: " + join(unknown, ", "));
}

FluxModel build_flux(ConfigReader& reader, int dim, double length) {
  const double alpha = reader.number("flux.alpha", 0.0);
  const double beta = reader.number("flux.beta", 1.0);
  if (!(alpha < beta)) throw ValidationError("flux.alpha must be below flux.beta");
  const auto profiles = split_list(reader.text("flux.profile"));
  if (profiles.empty()) throw ValidationError("flux.profile lists no terms");
  const auto directions = parse_directions(reader, "flux.direction", dim, profiles.size());

  const std::string kind = reader.text("flux.coefficient", "constant");
  std::vector<double> interfaces;
  std::function<double(double, const Eigen::VectorXd&)> scale;
  bool x_dependent = false;
  bool t_dependent = false;
  if (kind == "constant") {
    scale = [](double, const Eigen::VectorXd&) { return 1.0; };
  } else if (kind == "layered") {
    interfaces = reader.numbers("flux.interfaces", {});
    const auto values = reader.numbers("flux.values", {});
    if (interfaces.empty() || values.size() != interfaces.size()) {
      throw ValidationError("layered flux needs as many flux.values as flux.interfaces");
    }
    for (double c : interfaces) {
      if (!(c >= 0.0 && c < length)) throw ValidationError("flux interface outside [0, length)");
    }
    if (!std::is_sorted(interfaces.begin(), interfaces.end()) ||
        std::adjacent_find(interfaces.begin(), interfaces.end()) != interfaces.end()) {
      throw ValidationError("flux.interfaces must be strictly increasing");
    }
    // Layer j runs from interface j to interface j + 1, the last one wrapping around.
    scale = [interfaces, values, length](double, const Eigen::VectorXd& x) {
      const double x1 = x[0] - length * std::floor(x[0] / length);
      const auto it = std::upper_bound(interfaces.begin(), interfaces.end(), x1);
      if (it == interfaces.begin()) return values.back();
      return values[static_cast<std::size_t>(it - interfaces.begin()) - 1];
    };
    x_dependent = true;
  } else if (kind == "expr") {
    auto expr = std::make_shared<Expression>(reader.text("flux.expression"));
    scale = [expr](double t, const Eigen::VectorXd& x) {
      ExpressionVars vars = space_vars(x);
      vars.t = t;
      return (*expr)(vars);
    };
    x_dependent = true;
    t_dependent = reader.flag("flux.time_dependent", false);
  } else {
    throw ValidationError("unknown flux.coefficient '" + kind + "'");
  }

  std::vector<FluxTerm> terms;
  for (std::size_t m = 0; m < profiles.size(); ++m) {
    const Eigen::VectorXd dir = directions[m];
    Coefficient coefficient = [scale, dir](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
      return scale(t, x) * dir;
    };
    terms.push_back({coefficient, make_profile(profiles[m], alpha, beta), x_dependent, t_dependent});
  }
  return FluxModel(dim, alpha, beta, length, std::move(terms), interfaces);
}

DiffusionMatrix build_diffusion(ConfigReader& reader, int dim) {
  return make_diffusion(reader.text("diffusion.spec", "zero"), dim);
}

ProjectedSymbol named_symbol(const std::string& name, int dim) {
  if (name == "one") return [](const Eigen::VectorXd&, double) { return Complex(1.0); };
  if (name == "z1") return [](const Eigen::VectorXd& z, double) { return Complex(z[0]); };
  if (name == "z2") {
    if (dim < 2) throw ValidationError("symbol z2 needs two dimensions");
    return [](const Eigen::VectorXd& z, double) { return Complex(z[1]); };
  }
  if (name == "abs") return [](const Eigen::VectorXd& z, double) { return Complex(z.norm()); };
  throw ValidationError("unknown test symbol '" + name + "' (expected one, z1, z2 or abs)");
}

TransportField transport_field(const FluxModel& flux) {
  return [flux](const Eigen::VectorXd& x, double lambda) { return flux.derivative(0.0, x, lambda); };
}

ScenarioBundle build_scenario(const ConfigMap& config, const Overrides& overrides, const std::string& name) {
  ConfigReader reader(config);
  const std::string title = reader.text("scenario.name", name);
  const int dim = reader.integer("grid.dim", 1);
  if (dim != 1 && dim != 2) throw ValidationError("grid.dim must be 1 or 2");
  const int points = reader.integer("grid.points", 256);
  const int lambda_nodes = reader.integer("grid.lambda_nodes", 65);
  const double length = reader.number("grid.length", 1.0);
  if (overrides.points) reader.record("grid.points", std::to_string(*overrides.points));
  if (overrides.lambda_nodes) reader.record("grid.lambda_nodes", std::to_string(*overrides.lambda_nodes));
  const int n_points = overrides.points.value_or(points);
  const int m_nodes = overrides.lambda_nodes.value_or(lambda_nodes);
  if (m_nodes < 3) throw ValidationError("grid.lambda_nodes must be at least 3");
  if (!(length > 0.0)) throw ValidationError("grid.length must be positive");
  const SpaceGrid grid(dim, n_points, length);

  FluxModel flux = build_flux(reader, dim, length);
  flux.validate();
  const double alpha = flux.alpha();
  const double beta = flux.beta();
  const LambdaGrid lambdas(alpha, beta, m_nodes);

  DiffusionMatrix diffusion = build_diffusion(reader, dim);
  validate(diffusion, LambdaGrid(alpha, beta, 257));
  CapitalDiffusion capital = CapitalDiffusion::integrate(diffusion, alpha, beta);
  capital.validate_monotone();

  auto initial_expr = std::make_shared<Expression>(reader.text("initial.expression"));
  const double noise = reader.number("initial.noise", 0.0);
  const std::uint64_t seed = overrides.seed;
  reader.record("run.seed", std::to_string(seed));
  auto initial = [initial_expr, noise, seed](const Eigen::VectorXd& x, double fast) {
    ExpressionVars vars = space_vars(x);
    vars.s = fast;
    double v = (*initial_expr)(vars);
    if (noise != 0.0) v += noise * (2.0 * point_noise(seed, x) - 1.0);
    return v;
  };

  Scenario sc{.name = title,
              .grid = grid,
              .lambdas = lambdas,
              .flux = flux,
              .diffusion = diffusion,
              .capital = capital,
              .initial = initial,
              .weights = {},
              .window = Window::whole(grid),
              .tests = {},
              .sequence_window = {},
              .exponents = {}};

  const std::string kind = reader.text("averaging.kind", "mollify");
  if (kind == "mollify") {
    sc.kind = LadderKind::mollify;
  } else if (kind == "oscillate") {
    sc.kind = LadderKind::oscillate;
  } else {
    throw ValidationError("averaging.kind must be mollify or oscillate");
  }
  sc.ladder = reader.integers("averaging.ladder", {3, 4, 5, 6, 7});
  if (sc.ladder.size() < 3) throw ValidationError("averaging.ladder needs at least three members");
  for (std::size_t i = 1; i < sc.ladder.size(); ++i) {
    if (sc.ladder[i] <= sc.ladder[i - 1]) throw ValidationError("averaging.ladder must be increasing");
  }
  sc.reference_length = reader.number("averaging.reference_length", length);
  for (const auto& entry : split_list(reader.text("averaging.weights", "one:1"))) {
    const auto colon = entry.find(':');
    if (colon == std::string::npos) throw ValidationError("averaging weight '" + entry + "' needs name:expression");
    sc.weights.push_back({trim(entry.substr(0, colon)), velocity_function(entry.substr(colon + 1))});
  }
  sc.window.lo = to_eigen(reader.numbers("averaging.window_lo", std::vector<double>(dim, 0.0)));
  sc.window.hi = to_eigen(reader.numbers("averaging.window_hi", std::vector<double>(dim, length)));
  if (sc.window.lo.size() != dim || sc.window.hi.size() != dim) {
    throw ValidationError("averaging window bounds need one value per axis");
  }
  if (window_measure(grid, sc.window) == 0.0) throw ValidationError("averaging window contains no cell");

  sc.t_final = reader.number("solver.t_final", 0.1);
  sc.cfl = reader.number("solver.cfl", 0.4);
  if (!(sc.t_final > 0.0)) throw ValidationError("solver.t_final must be positive");
  if (!(sc.cfl > 0.0 && sc.cfl <= 1.0)) throw ValidationError("solver.cfl must lie in (0, 1]");
  sc.track_entropy = reader.flag("solver.entropy", false);

  sc.exponents = ExponentProfile::from_q(reader.number("defect.q", kInfinity));
  const auto test_names = split_list(reader.text("defect.tests", "one"));
  const auto test_phi = split_list(reader.text("defect.test_phi", join(std::vector<std::string>(test_names.size(), "1"), ";")));
  const auto test_rho = split_list(reader.text("defect.test_rho", join(std::vector<std::string>(test_names.size(), "1"), ";")));
  if (test_phi.size() != test_names.size() || test_rho.size() != test_names.size()) {
    throw ValidationError("defect.test_phi and defect.test_rho need one entry per test");
  }
  for (std::size_t i = 0; i < test_names.size(); ++i) {
    sc.tests.push_back({test_names[i], space_function(test_phi[i]), named_symbol(test_names[i], dim),
                        velocity_function(test_rho[i])});
  }
  sc.sequence_window = space_function(reader.text("defect.v_window", "1"));
  sc.jobs = std::max(1, overrides.jobs);

  ScenarioBundle bundle{sc, {}, {}, space_function(reader.text("weakform.v", "cos(2*pi*x)")), {}};

  // Initial data must take values in the velocity interval for every member.
  for (int n : sc.ladder) {
    const RealField u0 = sc.initial_data(n);
    const double lo = u0.values().minCoeff();
    const double hi = u0.values().maxCoeff();
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo < alpha || hi > beta) {
      throw ValidationError("initial data of member n = " + std::to_string(n) + " leaves [" +
                            format_number(alpha) + ", " + format_number(beta) + "]");
    }
  }

  const auto epsilons = overrides.epsilons.value_or(reader.numbers("nondeg.epsilons", default_epsilon_ladder()));
  if (overrides.epsilons) reader.record("nondeg.epsilons", join(*overrides.epsilons, ","));
  const int x_points = reader.integer("nondeg.x_points", 8);
  const int directions = reader.integer("nondeg.directions", 64);
  const int nodes = reader.integer("nondeg.nodes", 4097);
  bundle.nondegeneracy = nondegeneracy_ladder(transport_field(flux), diffusion, LambdaGrid(alpha, beta, nodes),
                                              epsilons, cell_samples(dim, x_points, length),
                                              unit_directions(dim, directions), sc.jobs);
  std::vector<double> measures;
  for (const auto& r : bundle.nondegeneracy) measures.push_back(r.max_measure);
  bundle.localisation = localisation_verdict(epsilons, measures);

  reader.reject_unused();
  bundle.resolved = reader.resolved();
  return bundle;
}

SymbolAuditConfig build_symbol_audit(const ConfigMap& config, const Overrides& overrides) {
  ConfigReader reader(config);
  reader.text("scenario.name", "symbols");
  const int dim = reader.integer("grid.dim", 2);
  SymbolAuditConfig out{build_diffusion(reader, dim), {}, {}, {}, {}, {}, -0.4, 20.0, {}};
  out.lambdas = reader.numbers("symbols.lambdas", {-1.0, -0.5, 0.0, 0.5, 1.0});
  if (out.lambdas.empty()) throw ValidationError("symbols.lambdas is empty");
  const auto [lo, hi] = std::minmax_element(out.lambdas.begin(), out.lambdas.end());
  validate(out.diffusion, LambdaGrid(*lo, *hi == *lo ? *lo + 1.0 : *hi, 65));
  for (double l : out.lambdas) validate(out.diffusion, LambdaGrid(l, l + 1e-9, 2));

  out.kappa_values = reader.numbers("symbols.kappa_values", {0.0, 1.0, 1e3, 1e6});
  for (double k : out.kappa_values) {
    if (!(k >= 0.0)) throw ValidationError("symbols.kappa_values must be non-negative");
  }
  out.sweep.min_exp = reader.integer("symbols.min_exp", -10);
  out.sweep.max_exp = reader.integer("symbols.max_exp", 10);
  out.sweep.angles = reader.integer("symbols.angles", 32);
  out.sweep.max_order = reader.integer("symbols.max_order", dim);
  out.sweep.ratio_limit = reader.number("symbols.ratio_limit", 4.0);
  out.sweep.cover_transition_scales = reader.flag("symbols.cover_transition_scales", true);
  out.radius_exponents = reader.integers("symbols.radius_exponents", {3, 4, 5, 6, 7, 8, 9, 10});
  if (out.radius_exponents.size() < 2) throw ValidationError("symbols.radius_exponents needs two radii");
  for (int k : out.radius_exponents) {
    if (k < 1) throw ValidationError("symbols.radius_exponents must be at least 1");
  }
  out.modulus.angles = reader.integer("symbols.modulus_angles", 4096);
  out.modulus.directions = reader.integer("symbols.modulus_directions", 16);
  out.slope_limit = reader.number("symbols.slope_limit", -0.4);
  out.constant_limit = reader.number("symbols.constant_limit", 20.0);
  reader.record("run.seed", std::to_string(overrides.seed));
  reader.reject_unused();
  out.resolved = reader.resolved();
  return out;
}

SymbolAudit audit_symbols(const SymbolAuditConfig& config, int jobs) {
  const int dim = config.diffusion.dim();
  std::vector<std::pair<std::string, std::vector<Eigen::VectorXd>>> groups;
  groups.emplace_back("grid", kappa_grid(dim, config.kappa_values));
  for (double l : config.lambdas) {
    Eigen::VectorXd kappa = eigendecompose(config.diffusion, l).kappa.cwiseMax(0.0);
    groups.emplace_back("lambda=" + format_number(l), std::vector<Eigen::VectorXd>{kappa});
  }
  std::vector<std::pair<KappaSymbol, int>> symbols{{KappaSymbol::first_order, 0}};
  for (int m = 0; m < dim; ++m) symbols.emplace_back(KappaSymbol::second_order, m);

  const int tasks = static_cast<int>(groups.size() * symbols.size());
  std::vector<KappaSweepReport> reports(tasks);
  parallel_for(tasks, jobs, [&](int i) {
    const auto& [kind, m] = symbols[i % symbols.size()];
    reports[i] = kappa_uniformity_sweep(kind, groups[i / symbols.size()].second, 1.0, m, config.sweep);
  });

  SymbolAudit audit;
  double min_constant = kInfinity;
  for (int i = 0; i < tasks; ++i) {
    const auto& [kind, m] = symbols[i % symbols.size()];
    const std::string label = kind == KappaSymbol::first_order ? "first_order" : "second_order_m" + std::to_string(m);
    for (const auto& row : reports[i].rows) {
      audit.rows.push_back({label, groups[i / symbols.size()].first, row});
      audit.max_constant = std::max(audit.max_constant, row.constant);
      audit.max_relative_gap = std::max(audit.max_relative_gap, row.max_relative_gap);
      if (!row.trivial) min_constant = std::min(min_constant, row.constant);
    }
  }
  audit.ratio = std::isfinite(min_constant) && min_constant > 0.0 ? audit.max_constant / min_constant : 1.0;
  audit.uniform = audit.ratio <= config.sweep.ratio_limit && audit.max_constant <= config.constant_limit;

  const VectorSymbol identity = [](const Eigen::VectorXd& z) -> Eigen::VectorXcd { return z.cast<Complex>(); };
  const std::size_t radii = config.radius_exponents.size();
  std::vector<double> values(config.lambdas.size() * radii);
  parallel_for(static_cast<int>(values.size()), jobs, [&](int i) {
    const Eigen::MatrixXd a = config.diffusion(config.lambdas[i / radii]);
    values[i] = continuity_modulus(identity, a, std::ldexp(1.0, config.radius_exponents[i % radii]), config.modulus);
  });
  audit.modulus_decays = true;
  audit.worst_slope = -kInfinity;
  for (std::size_t l = 0; l < config.lambdas.size(); ++l) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < radii; ++k) {
      const double value = values[l * radii + k];
      const double radius = std::ldexp(1.0, config.radius_exponents[k]);
      audit.modulus.push_back({config.lambdas[l], radius, value});
      if (k > 0 && value > values[l * radii + k - 1]) audit.modulus_decays = false;
      const double x = std::log(radius);
      const double y = std::log(std::max(value, 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double count = static_cast<double>(radii);
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    audit.worst_slope = std::max(audit.worst_slope, slope);
  }
  if (audit.worst_slope > config.slope_limit) audit.modulus_decays = false;
  return audit;
}

NondegConfig build_nondeg(const ConfigMap& config, const Overrides& overrides) {
  ConfigReader reader(config);
  reader.text("scenario.name", "nondeg");
  const int dim = reader.integer("grid.dim", 2);
  if (dim != 1 && dim != 2) throw ValidationError("grid.dim must be 1 or 2");
  const double length = reader.number("grid.length", 1.0);
  FluxModel flux = build_flux(reader, dim, length);
  flux.validate();
  DiffusionMatrix diffusion = build_diffusion(reader, dim);
  const double lo = reader.number("nondeg.lo", flux.alpha());
  const double hi = reader.number("nondeg.hi", flux.beta());
  const int nodes = reader.integer("nondeg.nodes", 131073);
  if (!(lo < hi) || nodes < 3) throw ValidationError("nondeg interval needs lo < hi and at least 3 nodes");
  LambdaGrid interval(lo, hi, nodes);
  validate(diffusion, LambdaGrid(lo, hi, 257));

  std::vector<double> epsilons = reader.numbers("nondeg.epsilons", default_epsilon_ladder());
  if (overrides.epsilons) {
    epsilons = *overrides.epsilons;
    reader.record("nondeg.epsilons", join(epsilons, ","));
  }
  if (epsilons.size() < 3) throw ValidationError("the epsilon ladder needs at least three rungs");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw ValidationError("epsilons must be positive");
  }
  const int x_points = reader.integer("nondeg.x_points", 1);
  const int directions = reader.integer("nondeg.directions", 64);
  if (x_points < 1 || directions < 1) throw ValidationError("nondeg sample counts must be positive");
  reader.record("run.seed", std::to_string(overrides.seed));
  reader.reject_unused();
  return {flux,     diffusion, interval, epsilons, cell_samples(dim, x_points, length),
          unit_directions(dim, directions), reader.resolved()};
}

NondegOutcome run_nondeg(const NondegConfig& config, int jobs) {
  NondegOutcome out;
  out.reports = nondegeneracy_ladder(transport_field(config.flux), config.diffusion, config.interval,
                                     config.epsilons, config.x_samples, config.directions, jobs);
  std::vector<double> measures;
  for (const auto& r : out.reports) measures.push_back(r.max_measure);
  out.verdict = localisation_verdict(config.epsilons, measures);
  return out;
}

}  // namespace velavg
