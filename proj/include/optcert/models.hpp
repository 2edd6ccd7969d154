// Candidate predictive models: Dirac embeddings of successor maps, data-fit
// baselines, model-based solution and value-matched model synthesis.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "optcert/mdp.hpp"

namespace optcert {

/// Deterministic successor map f(s,a).
class DeterministicModel {
public:
    DeterministicModel() = default;
    DeterministicModel(std::size_t n_states, std::size_t n_actions)
        : n_(n_states), m_(n_actions), next_(n_states * n_actions, 0) {}

    std::size_t n_states() const { return n_; }
    std::size_t n_actions() const { return m_; }

    std::size_t& operator()(std::size_t s, std::size_t a) { return next_[s * m_ + a]; }
    std::size_t operator()(std::size_t s, std::size_t a) const { return next_[s * m_ + a]; }

    bool operator==(const DeterministicModel&) const = default;

private:
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<std::size_t> next_;
};

struct StochasticModel {
    Kernel kernel;
    bool operator==(const StochasticModel&) const = default;
};

using PredictiveModel = std::variant<DeterministicModel, StochasticModel>;

/// (state, action) pair flagged by a check, with both advantages for context.
struct PairWitness {
    std::size_t state = 0;
    std::size_t action = 0;
    std::string reason;
    double true_advantage = 0.0;
    double model_advantage = 0.0;
};

struct SynthesisReport {
    PredictiveModel model;
    /// |target - achieved E[V*]| per pair; +inf where the target is unbounded.
    Table matching_error;
    bool verified = false;
    std::vector<PairWitness> witnesses;
};

/// One-hot kernel at f(s,a). Throws Error("IndexOutOfRange").
StochasticModel as_dirac_kernel(const DeterministicModel& model);

/// Kernel view of either model kind.
StochasticModel to_stochastic(const PredictiveModel& model);

/// Successor whose embedding is nearest to the mean successor embedding.
/// Throws Error("MissingEmbeddings").
DeterministicModel expectation_fit(const FiniteMDP& mdp);

/// Most likely successor, ties to the lowest index.
DeterministicModel mle_fit(const FiniteMDP& mdp);

/// Bellman fixed point of the model-based MDP.
SolveReport solve_model_mdp(const StochasticModel& model, const Table& stage_cost, double gamma,
                            const SolveOptions& options = {});

/// Stochastic model whose expectation of V* equals the true one at every pair.
SynthesisReport synthesize_value_matched_kernel(const FiniteMDP& mdp, std::span<const double> V_star,
                                                const SolveOptions& options = {});

/// Deterministic model rounding each target to the state with the nearest V*.
/// `verified` may legitimately come back false.
SynthesisReport synthesize_value_matched_deterministic(const FiniteMDP& mdp,
                                                       std::span<const double> V_star,
                                                       const SolveOptions& options = {});

/// Initial states whose model trajectories under `pi_star` keep V-hat finite
/// for every step k < horizon. Returned sorted.
std::vector<std::size_t> check_assumption_omega(const StochasticModel& model,
                                                std::span<const double> V_hat,
                                                std::span<const std::size_t> pi_star,
                                                std::size_t horizon);

/// Pairs where tolerance-argmin membership differs between two Q tables,
/// restricted to states where both value functions are finite.
std::vector<PairWitness> argmin_mismatches(const Table& Q_true, const Table& Q_model, double tol);

}  // namespace optcert
