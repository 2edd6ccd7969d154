// Finite discounted MDPs: validation, value iteration, exact policy evaluation,
// advantages and constraint folding.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "optcert/tables.hpp"

namespace optcert {

using ValueFunction = std::vector<double>;
using ActionValueFunction = Table;
using Policy = std::vector<std::size_t>;
using Mask = std::vector<std::vector<bool>>;

/// The true system. Kernel rows are probability vectors, stage costs may be +inf.
struct FiniteMDP {
    Kernel kernel;
    Table stage_cost;
    double gamma = 0.9;
    /// Optional per-state coordinates; empty when the states carry no metric.
    std::vector<std::vector<double>> embeddings;
    std::vector<double> initial_distribution;

    std::size_t n_states() const { return kernel.n_states(); }
    std::size_t n_actions() const { return kernel.n_actions(); }
};

struct Violation {
    std::string rule;   // e.g. "RowNotStochastic"
    std::string where;  // e.g. "s=0,a=1"
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

/// Per-state tolerance-argmin sets plus the lowest-index representative.
struct PolicySet {
    std::vector<std::vector<std::size_t>> sets;
    Policy canonical;
    /// true where every action has infinite cost; the set is empty there and
    /// `canonical` holds 0 as a placeholder.
    std::vector<bool> infeasible;

    std::size_t n_states() const { return sets.size(); }
};

struct SolveOptions {
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    double argmin_tol = 1e-9;
    /// Keep ||V_{k+1} - V_k|| for every sweep (contraction diagnostics).
    bool record_increments = false;
};

struct SolveReport {
    ValueFunction V;
    ActionValueFunction Q;
    PolicySet policy;
    double bellman_residual = 0.0;
    std::size_t iterations = 0;
    std::vector<double> increments;
};

struct PolicyEvaluation {
    ValueFunction V;
    double J = 0.0;
};

ValidationResult validate_mdp(const FiniteMDP& mdp);

/// Q(s,a) = L(s,a) + gamma * E[V(s+) | s,a] for every pair.
Table bellman_q(const Kernel& kernel, const Table& stage_cost, double gamma,
                std::span<const double> V);

/// Row minima of Q.
ValueFunction row_min(const Table& Q);

/// sup over pairs with finite Q of |Q - L - gamma E[V]|.
double bellman_residual(const Kernel& kernel, const Table& stage_cost, double gamma,
                        std::span<const double> V, const Table& Q);

/// Value iteration on an arbitrary kernel/cost pair (shared by the true and model MDPs).
/// Throws Error("NonConvergence") when the stopping threshold is not met in time.
SolveReport solve_bellman(const Kernel& kernel, const Table& stage_cost, double gamma,
                          const SolveOptions& options = {});

SolveReport value_iteration(const FiniteMDP& mdp, const SolveOptions& options = {});

PolicySet greedy_policy_set(const Table& Q, double tol = 1e-9);

/// Exact closed-loop value of a stationary deterministic policy via a dense solve.
PolicyEvaluation evaluate_policy(const FiniteMDP& mdp, std::span<const std::size_t> policy,
                                 std::span<const double> rho0);

/// A(s,a) = Q(s,a) - V(s). Rows with V = +inf are +inf.
/// Throws Error("MismatchedPair") if V is not the row minimum of Q within `tol`.
Table advantage(const Table& Q, std::span<const double> V, double tol = 1e-9);

/// Folds a violated-constraint mask into the cost: masked entries become +inf.
Table apply_constraints(const Table& L, const Mask& h_violated);

}  // namespace optcert
