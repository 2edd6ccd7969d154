#include "optcert/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace optcert {

namespace {

void validate_scheme(const MPCScheme& scheme) {
    const std::size_t n = scheme.model.n_states();
    const std::size_t m = scheme.model.n_actions();
    if (scheme.horizon < 1) throw Error("InvalidScheme", "horizon must be >= 1");
    if (scheme.stage_cost.rows() != n || scheme.stage_cost.cols() != m) {
        throw Error("InvalidScheme", "stage cost shape differs from the model");
    }
    if (scheme.terminal_cost.size() != n) throw Error("InvalidScheme", "terminal cost length");
    if (!scheme.terminal_set.empty() && scheme.terminal_set.size() != n) {
        throw Error("InvalidScheme", "terminal set length");
    }
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < m; ++a) {
            if (scheme.model(s, a) >= n) throw Error("InvalidScheme", "successor index out of range");
        }
    }
}

// L(s,a) + gamma * V(f(s,a)) with +inf propagation.
double stage_q(const MPCScheme& scheme, std::span<const double> V_next, std::size_t s, std::size_t a) {
    const double L = scheme.stage_cost(s, a);
    const double v = V_next[scheme.model(s, a)];
    return (is_inf(L) || is_inf(v)) ? kInf : L + scheme.gamma * v;
}

}  // namespace

ValueFunction MPCScheme::folded_terminal_cost() const {
    ValueFunction T = terminal_cost;
    if (!terminal_set.empty()) {
        for (std::size_t s = 0; s < T.size(); ++s) {
            if (!terminal_set[s]) T[s] = kInf;
        }
    }
    return T;
}

MPCTables build_mpc_tables(const MPCScheme& scheme, double argmin_tol) {
    validate_scheme(scheme);
    const std::size_t n = scheme.model.n_states();
    const std::size_t m = scheme.model.n_actions();
    const std::size_t N = scheme.horizon;

    MPCTables tables;
    tables.value_to_go.assign(N + 1, ValueFunction(n, kInf));
    tables.value_to_go[N] = scheme.folded_terminal_cost();
    Table Q(n, m);
    for (std::size_t k = N; k-- > 0;) {
        const auto& next = tables.value_to_go[k + 1];
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t a = 0; a < m; ++a) Q(s, a) = stage_q(scheme, next, s, a);
        }
        tables.value_to_go[k] = row_min(Q);
    }
    tables.Q0 = std::move(Q);
    tables.policy = greedy_policy_set(tables.Q0, argmin_tol);
    return tables;
}

PolicySet mpc_policy(const MPCTables& tables, double tol) { return greedy_policy_set(tables.Q0, tol); }

OpenLoopSolution open_loop_solve(const MPCScheme& scheme, const MPCTables& tables, std::size_t s0,
                                 double tol) {
    const std::size_t n = scheme.model.n_states();
    if (s0 >= n) throw Error("IndexOutOfRange", "initial state " + std::to_string(s0));
    if (is_inf(tables.V_mpc()[s0])) {
        throw Error("Infeasible", "no admissible input sequence from state " + std::to_string(s0));
    }
    const std::size_t N = tables.horizon();
    OpenLoopSolution sol;
    sol.states.push_back(s0);
    double discount = 1.0;
    std::size_t s = s0;
    for (std::size_t i = 0; i < N; ++i) {
        const auto& next = tables.value_to_go[i + 1];
        double best = kInf;
        for (std::size_t a = 0; a < scheme.model.n_actions(); ++a) best = std::min(best, stage_q(scheme, next, s, a));
        std::size_t chosen = 0;
        for (std::size_t a = 0; a < scheme.model.n_actions(); ++a) {
            if (stage_q(scheme, next, s, a) <= best + tol) {
                chosen = a;
                break;
            }
        }
        sol.inputs.push_back(chosen);
        sol.objective += discount * scheme.stage_cost(s, chosen);
        discount *= scheme.gamma;
        s = scheme.model(s, chosen);
        sol.states.push_back(s);
    }
    sol.objective += discount * tables.value_to_go[N][s];
    return sol;
}

OpenLoopSolution open_loop_solve(const MPCScheme& scheme, std::size_t s0) {
    return open_loop_solve(scheme, build_mpc_tables(scheme), s0);
}

double shifted_mpc_q(const MPCTables& tables, const LambdaShift& lambda, std::size_t s, std::size_t a) {
    const double q = tables.Q0(s, a);
    return is_inf(q) ? kInf : lambda.values[s] + q;
}

double mpc_modified_bellman_residual(const MPCScheme& scheme, const MPCTables& tables,
                                     const LambdaShift& lambda, ValueReading reading) {
    const auto& continuation = reading == ValueReading::Tail ? tables.value_to_go[1] : tables.V_mpc();
    double residual = 0.0;
    for (std::size_t s = 0; s < scheme.model.n_states(); ++s) {
        if (!lambda.domain[s]) continue;
        for (std::size_t a = 0; a < scheme.model.n_actions(); ++a) {
            const std::size_t next = scheme.model(s, a);
            if (!lambda.domain[next]) continue;
            const double q = shifted_mpc_q(tables, lambda, s, a);
            const double L = scheme.stage_cost(s, a);
            const double v = continuation[next];
            if (is_inf(q) || is_inf(L) || is_inf(v)) {
                // a finite/infinite split between the two sides is itself a violation
                if (is_inf(q) != (is_inf(L) || is_inf(v))) residual = kInf;
                continue;
            }
            const double gap = lambda.values[s] - scheme.gamma * lambda.values[next];
            const double v_lambda = lambda.values[next] + v;
            residual = std::max(residual, std::abs(q - L - gap - scheme.gamma * v_lambda));
        }
    }
    return residual;
}

EquivalenceCheck mpc_equals_model_mdp_check(const MPCTables& tables, const Table& Q_hat, double tol) {
    EquivalenceCheck out;
    for (std::size_t s = 0; s < Q_hat.rows(); ++s) {
        for (std::size_t a = 0; a < Q_hat.cols(); ++a) {
            out.max_deviation = std::max(out.max_deviation, extended_distance(tables.Q0(s, a), Q_hat(s, a)));
        }
    }
    out.equal = out.max_deviation <= tol;
    return out;
}

}  // namespace optcert
