#include "velavg/report.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace velavg {

namespace {

std::ofstream open_csv(const std::string& path, const char* header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << header << '\n' << std::setprecision(17);
  return out;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ConfigMap& resolved) {
  std::string text;
  for (const auto& [k, v] : resolved) text += k + "=" + v + "\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

void write_manifest(const std::string& path, const ConfigMap& resolved,
                    const std::vector<std::pair<std::string, std::string>>& info) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "config_hash=" << config_hash(resolved) << '\n';
  for (const auto& [k, v] : info) out << k << '=' << v << '\n';
  for (const auto& [k, v] : resolved) out << "config." << k << '=' << v << '\n';
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceTable>& tables) {
  auto out = open_csv(path, "weight,n,m,distance,verdict");
  for (const auto& t : tables) {
    for (const auto& r : t.rows) {
      out << t.name << ',' << r.n << ',' << r.m << ',' << r.value << ',' << (t.verdict ? 1 : 0) << '\n';
    }
  }
}

void write_ladder_csv(const std::string& path, const SequenceRun& run) {
  auto out = open_csv(path,
                      "n,smoothing_length,steps,mass_drift,min_u,max_u,maximum_principle,min_zeta,"
                      "flux_error,derivative_error,warnings");
  for (const auto& e : run.entries) {
    out << e.n << ',' << run.scenario.smoothing_length(e.n) << ',' << e.steps << ',' << e.mass_drift << ','
        << e.min_u << ',' << e.max_u << ',' << (e.maximum_principle ? 1 : 0) << ',' << e.min_zeta << ','
        << e.flux_error << ',' << e.derivative_error << ',' << e.warnings.size() << '\n';
  }
}

void write_mu_ratio_csv(const std::string& path, const MuExperiment& mu) {
  auto out = open_csv(path, "test,ratio,wp_pi_norm");
  for (std::size_t i = 0; i < mu.ratios.size(); ++i) {
    const double norm = i < mu.report.test_norms.size() ? mu.report.test_norms[i].second : 0.0;
    out << mu.ratios[i].first << ',' << mu.ratios[i].second << ',' << norm << '\n';
  }
}

void write_weak_form_csv(const std::string& path, const WeakFormTable& table) {
  auto out = open_csv(path,
                      "n,test,transport_re,transport_im,diffusion_re,diffusion_im,entropy_re,entropy_im,"
                      "source_re,source_im,residual_abs,scale");
  for (const auto& r : table.rows) {
    const auto& t = r.terms;
    out << r.n << ',' << r.test_id << ',' << t.transport.real() << ',' << t.transport.imag() << ','
        << t.diffusion.real() << ',' << t.diffusion.imag() << ',' << t.entropy.real() << ',' << t.entropy.imag()
        << ',' << t.source.real() << ',' << t.source.imag() << ',' << std::abs(t.residual) << ',' << t.scale
        << '\n';
  }
}

void write_nondeg_csv(const std::string& path, const std::vector<NondegeneracyReport>& reports) {
  auto out = open_csv(path, "epsilon,max_measure,argmax_x,argmax_xi");
  for (const auto& r : reports) {
    out << r.epsilon << ',' << r.max_measure << ',' << r.argmax_x << ',' << r.argmax_xi << '\n';
  }
}

void write_nondeg_table_csv(const std::string& path, const std::vector<NondegeneracyReport>& reports) {
  auto out = open_csv(path, "epsilon,x_index,xi_index,measure");
  for (const auto& r : reports) {
    for (const auto& row : r.table) {
      out << r.epsilon << ',' << row.x_index << ',' << row.xi_index << ',' << row.measure << '\n';
    }
  }
}

void write_symbol_audit_csv(const std::string& path, const SymbolAudit& audit) {
  auto out = open_csv(path, "symbol,source,kappa,constant,recursion_constant,max_relative_gap,samples,skipped,trivial");
  for (const auto& r : audit.rows) {
    out << r.symbol << ',' << r.source << ',';
    for (Index j = 0; j < r.row.kappa.size(); ++j) out << (j ? " " : "") << r.row.kappa[j];
    out << ',' << r.row.constant << ',' << r.row.recursion_constant << ',' << r.row.max_relative_gap << ','
        << r.row.samples << ',' << r.row.skipped << ',' << (r.row.trivial ? 1 : 0) << '\n';
  }
}

void write_modulus_csv(const std::string& path, const SymbolAudit& audit) {
  auto out = open_csv(path, "lambda,radius,modulus");
  for (const auto& r : audit.modulus) out << r.lambda << ',' << r.radius << ',' << r.modulus << '\n';
}

void write_commutator_csv(const std::string& path, const CommutatorTable& table) {
  auto out = open_csv(path, "n,l2,l4");
  for (const auto& r : table.rows) out << r.n << ',' << r.l2 << ',' << r.l4 << '\n';
}

}  // namespace velavg
