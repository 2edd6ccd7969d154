// Command-level entry points: each runs one analysis on a scenario and renders
// the result as a machine-readable JSON document and a plain-text table.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optcert/harness.hpp"

namespace optcert {

struct Report {
    std::string json;
    std::string table;
    /// The analysis ran but its verdict is negative (refuted, not constant, ...).
    bool negative = false;
};

Report solve_report(const Scenario& scenario, const SolveOptions& options);
Report certify_report(const Scenario& scenario, const ModelSpec& model, const CertifyOptions& options);
Report suffcheck_report(const Scenario& scenario, const ModelSpec& model, const SolveOptions& options);
Report synthesize_report(const Scenario& scenario, bool deterministic, const SolveOptions& options);

/// `terminal`: "vhat", "zero", "scenario" or "file:<path>" (JSON array of numbers/"inf").
/// `horizon` 0 takes the scenario's MPC block horizon.
Report mpc_report(const Scenario& scenario, const ModelSpec& model, std::size_t horizon,
                  const std::string& terminal, const SolveOptions& options);

/// `policy`: "optimal", "model:<model-spec>" or "actions:<a0,a1,...>" (indices or labels).
Report simulate_report(const Scenario& scenario, const std::string& policy, std::size_t episodes,
                       std::uint64_t seed, std::size_t truncation, const SolveOptions& options);

Report compare_report(const Scenario& scenario, const std::vector<ModelSpec>& models,
                      const CertifyOptions& options);

}  // namespace optcert
