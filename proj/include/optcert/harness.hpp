// Closed-loop Monte Carlo simulation and model-family comparison.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optcert/certificates.hpp"
#include "optcert/scenario.hpp"

namespace optcert {

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t episodes = 0;
    std::size_t truncation = 0;
    /// gamma^K * max|finite L| / (1 - gamma)
    double truncation_bound = 0.0;
    std::uint64_t seed = 0;
};

/// Discounted return of `policy` on the true system, K steps per episode. Each
/// episode draws from its own substream derived from (seed, episode index),
/// so the estimate does not depend on thread scheduling.
MonteCarloEstimate simulate_closed_loop(const FiniteMDP& mdp, std::span<const std::size_t> policy,
                                        std::size_t truncation, std::size_t episodes, std::uint64_t seed,
                                        unsigned threads = 0);

/// One of: expectation | mle | synthesized-kernel | synthesized-deterministic |
/// perfect | file:<path>.
struct ModelSpec {
    enum class Kind { Expectation, Mle, SynthesizedKernel, SynthesizedDeterministic, Perfect, File };
    Kind kind = Kind::Perfect;
    std::string path;

    static ModelSpec parse(const std::string& text);  // throws Error("UsageError")
    std::string name() const;
};

struct BuiltModel {
    PredictiveModel model;
    /// Set for synthesized models.
    std::optional<SynthesisReport> synthesis;
};

BuiltModel build_model(const ModelSpec& spec, const FiniteMDP& mdp, std::span<const double> V_star,
                       const SolveOptions& options = {});

struct ModelOutcome {
    std::string spec;
    BuiltModel built;
    Policy canonical_policy;
    double J = 0.0;
    double gap = 0.0;
    CertificateReport certificate;
    DeltaCheck delta;
};

struct ComparisonReport {
    std::string scenario;
    SolveReport optimal;
    PolicyEvaluation optimal_evaluation;
    /// Sorted by gap (stable).
    std::vector<ModelOutcome> models;
};

ComparisonReport compare_models(const Scenario& scenario, const std::vector<ModelSpec>& specs,
                                const CertifyOptions& options = {});

/// Specs used by `run_builtin` and `demo`.
std::vector<ModelSpec> baseline_specs();

ComparisonReport run_builtin(std::string_view name, const CertifyOptions& options = {});

}  // namespace optcert
