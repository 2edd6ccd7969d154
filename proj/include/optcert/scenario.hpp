// Scenario files, model specs and the built-in demonstration scenarios.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "optcert/mdp.hpp"
#include "optcert/models.hpp"

namespace optcert {

struct MPCBlock {
    std::size_t horizon = 1;
    /// Empty means "not given" (the caller chooses V-hat* or zero).
    ValueFunction terminal_cost;
    /// Empty means every state.
    std::vector<bool> terminal_set;

    bool operator==(const MPCBlock&) const = default;
};

struct Scenario {
    std::string name;
    std::vector<std::string> state_labels;
    std::vector<std::vector<double>> embeddings;
    std::vector<std::string> action_labels;
    Kernel kernel;
    Table stage_cost;
    double gamma = 0.9;
    std::vector<double> initial_distribution;
    std::optional<Mask> constraint_mask;
    std::optional<MPCBlock> mpc;

    /// The true MDP with the constraint mask folded into the stage cost.
    FiniteMDP mdp() const;

    bool operator==(const Scenario&) const = default;
};

/// Parses a scenario. Throws Error("ParseError") with a line or field, or
/// Error("ValidationError") listing every violated invariant.
Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& scenario);

/// Throws Error("FileNotFound") when the path does not exist.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

/// perfect2 | risky2 | swamp5 | cliffgrid. Throws Error("UnknownScenario").
Scenario builtin_scenario(std::string_view name);
const std::vector<std::string>& builtin_names();

/// Model file: {"kind": "deterministic", "successor": [[...]]} or
/// {"kind": "stochastic", "kernel": [[[...]]]}, optionally nested under "model".
PredictiveModel load_model(const std::string& path, std::size_t n_states, std::size_t n_actions);
std::string model_to_json_text(const PredictiveModel& model);

}  // namespace optcert
