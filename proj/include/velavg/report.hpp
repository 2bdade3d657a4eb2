#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "velavg/config.hpp"

namespace velavg {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);

/// Hash of the resolved configuration as 16 hex digits; keys are hashed in sorted order.
std::string config_hash(const ConfigMap& resolved);

/// key=value lines: the config hash, then `info` in the given order, then the
/// resolved configuration sorted by key.
void write_manifest(const std::string& path, const ConfigMap& resolved,
                    const std::vector<std::pair<std::string, std::string>>& info);

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceTable>& tables);
void write_ladder_csv(const std::string& path, const SequenceRun& run);
void write_mu_ratio_csv(const std::string& path, const MuExperiment& mu);
void write_weak_form_csv(const std::string& path, const WeakFormTable& table);
void write_nondeg_csv(const std::string& path, const std::vector<NondegeneracyReport>& reports);
/// Every (x, direction) measure of every rung.
void write_nondeg_table_csv(const std::string& path, const std::vector<NondegeneracyReport>& reports);
void write_symbol_audit_csv(const std::string& path, const SymbolAudit& audit);
void write_modulus_csv(const std::string& path, const SymbolAudit& audit);
void write_commutator_csv(const std::string& path, const CommutatorTable& table);

}  // namespace velavg
