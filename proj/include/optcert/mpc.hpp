// Deterministic finite-horizon MPC over a discrete state set, solved by
// backward dynamic programming.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "optcert/certificates.hpp"
#include "optcert/models.hpp"

namespace optcert {

struct MPCScheme {
    DeterministicModel model;
    /// Constraint-folded stage cost (+inf on violated pairs).
    Table stage_cost;
    ValueFunction terminal_cost;
    /// Admissible terminal states; empty means every state.
    std::vector<bool> terminal_set;
    std::size_t horizon = 1;
    double gamma = 0.9;

    /// Terminal cost with +inf outside the terminal set.
    ValueFunction folded_terminal_cost() const;
};

struct MPCTables {
    /// value_to_go[k] is the optimal cost of the remaining N-k steps; value_to_go[0] = V^MPC.
    std::vector<ValueFunction> value_to_go;
    Table Q0;
    PolicySet policy;

    const ValueFunction& V_mpc() const { return value_to_go.front(); }
    std::size_t horizon() const { return value_to_go.size() - 1; }
};

struct OpenLoopSolution {
    std::vector<std::size_t> inputs;
    std::vector<std::size_t> states;
    double objective = 0.0;
};

/// Throws Error("InvalidScheme") on shape or index problems. Infeasibility is +inf, not an error.
MPCTables build_mpc_tables(const MPCScheme& scheme, double argmin_tol = 1e-9);

/// Tolerance-argmin of Q0; `infeasible` flags states with V^MPC = +inf.
PolicySet mpc_policy(const MPCTables& tables, double tol = 1e-9);

/// Greedy rollout through the tables. Throws Error("Infeasible") when V^MPC(s0) = +inf.
OpenLoopSolution open_loop_solve(const MPCScheme& scheme, const MPCTables& tables, std::size_t s0,
                                 double tol = 1e-9);
OpenLoopSolution open_loop_solve(const MPCScheme& scheme, std::size_t s0);

/// Q_lambda^MPC(s,a) = lambda(s) + Q^MPC(s,a).
double shifted_mpc_q(const MPCTables& tables, const LambdaShift& lambda, std::size_t s, std::size_t a);

enum class ValueReading {
    /// Continuation is the (N-1)-horizon value the recursion actually uses.
    Tail,
    /// Continuation is V^MPC itself; an identity only when the terminal cost is stationary.
    Stationary,
};

/// sup over defined pairs of |Q_lambda - L - Lambda - gamma V_lambda(f(s,a))| with
/// Lambda(s,a) = lambda(s) - gamma lambda(f(s,a)).
double mpc_modified_bellman_residual(const MPCScheme& scheme, const MPCTables& tables,
                                     const LambdaShift& lambda, ValueReading reading = ValueReading::Tail);

struct EquivalenceCheck {
    bool equal = false;
    double max_deviation = 0.0;
};

/// Compares Q^MPC with the model-based Q-hat*; a finite/infinite mismatch is an infinite deviation.
EquivalenceCheck mpc_equals_model_mdp_check(const MPCTables& tables, const Table& Q_hat, double tol = 1e-8);

}  // namespace optcert
