#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "velavg/lab.hpp"
#include "velavg/symbol_analysis.hpp"

namespace velavg {

/// Flattened "section.key" -> value view of an INI scenario file.
using ConfigMap = std::map<std::string, std::string>;

/// Throws ValidationError for a missing or malformed file.
ConfigMap load_config(const std::string& path);
ConfigMap parse_config(const std::string& text);

/// Keys whose values differ between two configs (including keys present in one only).
std::vector<std::string> config_diff(const ConfigMap& lhs, const ConfigMap& rhs);

/// Command-line settings that override or extend the file.
struct Overrides {
  std::optional<int> points;
  std::optional<int> lambda_nodes;
  std::optional<std::vector<double>> epsilons;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Typed access that records every value it hands out, defaults included, so
/// the resolved configuration can be written to the manifest.
class ConfigReader {
 public:
  explicit ConfigReader(ConfigMap entries);

  bool has(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback);
  std::string text(const std::string& key);  // required
  double number(const std::string& key, double fallback);
  double number(const std::string& key);
  int integer(const std::string& key, int fallback);
  bool flag(const std::string& key, bool fallback);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  std::vector<int> integers(const std::string& key, const std::vector<int>& fallback);
  void record(const std::string& key, const std::string& value) { resolved_[key] = value; }

  const ConfigMap& resolved() const { return resolved_; }
  /// Throws ValidationError naming any file entry that was never read.
  void reject_unused() const;

 private:
  ConfigMap entries_;
  ConfigMap resolved_;
};

/// Semicolon-separated list with surrounding blanks trimmed.
std::vector<std::string> split_list(const std::string& text, char separator = ';');

FluxModel build_flux(ConfigReader& reader, int dim, double length);
DiffusionMatrix build_diffusion(ConfigReader& reader, int dim);
ProjectedSymbol named_symbol(const std::string& name, int dim);

struct ScenarioBundle {
  Scenario scenario;
  /// Non-degeneracy ladder of the scenario's flux and diffusion, run at load.
  std::vector<NondegeneracyReport> nondegeneracy;
  LocalisationVerdict localisation;
  std::function<double(const Eigen::VectorXd&)> weak_form_v;
  ConfigMap resolved;
};

/// Builds and validates a scenario: flux conditions, positive semi-definite
/// and monotone diffusion, initial data inside [alpha, beta].
ScenarioBundle build_scenario(const ConfigMap& config, const Overrides& overrides, const std::string& name);

struct SymbolAuditConfig {
  DiffusionMatrix diffusion;
  std::vector<double> lambdas;
  std::vector<double> kappa_values;
  SweepOptions sweep;
  std::vector<int> radius_exponents;
  ModulusOptions modulus;
  double slope_limit = -0.4;
  double constant_limit = 20.0;
  ConfigMap resolved;
};

SymbolAuditConfig build_symbol_audit(const ConfigMap& config, const Overrides& overrides);

struct SymbolAuditRow {
  std::string symbol;  // "first_order" or "second_order_m<component>"
  std::string source;  // "grid" or "lambda=<value>"
  KappaSweepRow row;
};

struct ModulusRow {
  double lambda;
  double radius;
  double modulus;
};

struct SymbolAudit {
  std::vector<SymbolAuditRow> rows;
  std::vector<ModulusRow> modulus;
  double max_constant = 0.0;
  double ratio = 0.0;
  double max_relative_gap = 0.0;
  bool uniform = false;
  bool modulus_decays = false;
  double worst_slope = 0.0;  // largest fitted log-log slope over the sampled lambdas
  bool passed() const { return uniform && modulus_decays; }
};

/// Kappa sweeps of both model symbols over the configured grid and over the
/// eigenvalues of a(lambda), then the continuity modulus of z -> z composed with
/// the projection of a(lambda) at each radius 2^k.
SymbolAudit audit_symbols(const SymbolAuditConfig& config, int jobs = 1);

struct NondegConfig {
  FluxModel flux;
  DiffusionMatrix diffusion;
  LambdaGrid interval;
  std::vector<double> epsilons;
  std::vector<Eigen::VectorXd> x_samples;
  std::vector<Eigen::VectorXd> directions;
  ConfigMap resolved;
};

NondegConfig build_nondeg(const ConfigMap& config, const Overrides& overrides);

struct NondegOutcome {
  std::vector<NondegeneracyReport> reports;
  LocalisationVerdict verdict;
};

NondegOutcome run_nondeg(const NondegConfig& config, int jobs = 1);

/// Velocity f(x, l) = d_l F(0, x, l) of the flux as a transport field.
TransportField transport_field(const FluxModel& flux);

}  // namespace velavg
