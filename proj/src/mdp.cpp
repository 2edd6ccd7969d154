#include "optcert/mdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace optcert {

namespace {

constexpr double kStochasticTol = 1e-12;

std::string pair_str(std::size_t s, std::size_t a) {
    std::ostringstream os;
    os << "s=" << s << ",a=" << a;
    return os.str();
}

}  // namespace

ValidationResult validate_mdp(const FiniteMDP& mdp) {
    ValidationResult result;
    auto add = [&](std::string rule, std::string where) {
        result.violations.push_back({std::move(rule), std::move(where)});
    };

    const std::size_t n = mdp.n_states();
    const std::size_t m = mdp.n_actions();
    if (n == 0) add("EmptyStateSpace", "n_states=0");
    if (m == 0) add("EmptyActionSpace", "n_actions=0");
    if (mdp.stage_cost.rows() != n || mdp.stage_cost.cols() != m) {
        add("ShapeMismatch", "stage_cost");
        return result;
    }

    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < m; ++a) {
            const auto row = mdp.kernel.row(s, a);
            double sum = 0.0;
            bool bad_entry = false;
            for (double p : row) {
                if (!(p >= 0.0) || std::isinf(p)) bad_entry = true;
                sum += p;
            }
            if (bad_entry) add("NegativeProbability", pair_str(s, a));
            else if (std::abs(sum - 1.0) > kStochasticTol) add("RowNotStochastic", pair_str(s, a));

            const double c = mdp.stage_cost(s, a);
            if (std::isnan(c)) add("NaNCost", pair_str(s, a));
            else if (c == -kInf) add("NegativeInfiniteCost", pair_str(s, a));
        }
    }

    if (!(mdp.gamma > 0.0 && mdp.gamma < 1.0)) {
        std::ostringstream os;
        os << "gamma=" << mdp.gamma;
        add("UnsupportedDiscount", os.str());
    }

    const auto& rho0 = mdp.initial_distribution;
    if (rho0.size() != n) {
        add("ShapeMismatch", "initial_distribution");
    } else {
        double sum = 0.0;
        bool negative = false;
        for (double p : rho0) {
            if (!(p >= 0.0) || std::isinf(p)) negative = true;
            sum += p;
        }
        if (negative) add("NegativeProbability", "initial_distribution");
        else if (std::abs(sum - 1.0) > kStochasticTol) add("InitialNotStochastic", "initial_distribution");
    }

    if (!mdp.embeddings.empty()) {
        if (mdp.embeddings.size() != n) {
            add("ShapeMismatch", "embeddings");
        } else {
            const std::size_t d = mdp.embeddings.front().size();
            for (std::size_t s = 0; s < n; ++s) {
                const auto& e = mdp.embeddings[s];
                if (e.size() != d || d == 0) add("EmbeddingDimension", "s=" + std::to_string(s));
                for (double x : e) {
                    if (!std::isfinite(x)) add("EmbeddingNotFinite", "s=" + std::to_string(s));
                }
            }
        }
    }
    return result;
}

Table bellman_q(const Kernel& kernel, const Table& stage_cost, double gamma,
                std::span<const double> V) {
    const std::size_t n = kernel.n_states();
    const std::size_t m = kernel.n_actions();
    Table Q(n, m);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < m; ++a) {
            const double L = stage_cost(s, a);
            if (is_inf(L)) {
                Q(s, a) = kInf;
                continue;
            }
            const double ev = expectation(kernel.row(s, a), V);
            Q(s, a) = is_inf(ev) ? kInf : L + gamma * ev;
        }
    }
    return Q;
}

ValueFunction row_min(const Table& Q) {
    ValueFunction V(Q.rows(), kInf);
    for (std::size_t s = 0; s < Q.rows(); ++s) {
        for (double q : Q.row(s)) V[s] = std::min(V[s], q);
    }
    return V;
}

double bellman_residual(const Kernel& kernel, const Table& stage_cost, double gamma,
                        std::span<const double> V, const Table& Q) {
    const Table target = bellman_q(kernel, stage_cost, gamma, V);
    double residual = 0.0;
    for (std::size_t s = 0; s < Q.rows(); ++s) {
        for (std::size_t a = 0; a < Q.cols(); ++a) {
            if (is_inf(Q(s, a)) && is_inf(target(s, a))) continue;
            residual = std::max(residual, extended_distance(Q(s, a), target(s, a)));
        }
    }
    return residual;
}

SolveReport solve_bellman(const Kernel& kernel, const Table& stage_cost, double gamma,
                          const SolveOptions& options) {
    const std::size_t n = kernel.n_states();
    // Stopping on the increment gives a final Bellman residual <= tol.
    const double threshold = options.tol * (1.0 - gamma) / (2.0 * gamma);

    SolveReport report;
    ValueFunction V(n, 0.0);
    Table Q;
    double increment = kInf;
    std::size_t it = 0;
    while (it < options.max_iter) {
        ++it;
        Q = bellman_q(kernel, stage_cost, gamma, V);
        ValueFunction next = row_min(Q);

        bool flipped = false;
        double finite_inc = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            const double d = extended_distance(next[s], V[s]);
            if (is_inf(d)) flipped = true;
            else finite_inc = std::max(finite_inc, d);
        }
        if (options.record_increments) report.increments.push_back(finite_inc);
        increment = flipped ? kInf : finite_inc;
        V = std::move(next);
        if (increment <= threshold) break;
    }

    report.V = std::move(V);
    report.Q = std::move(Q);
    report.iterations = it;
    report.bellman_residual = bellman_residual(kernel, stage_cost, gamma, report.V, report.Q);
    if (increment > threshold) {
        std::ostringstream os;
        os << "value iteration stopped after " << it << " sweeps with increment " << increment
           << " (residual " << report.bellman_residual << ")";
        throw Error("NonConvergence", os.str());
    }
    report.policy = greedy_policy_set(report.Q, options.argmin_tol);
    return report;
}

SolveReport value_iteration(const FiniteMDP& mdp, const SolveOptions& options) {
    return solve_bellman(mdp.kernel, mdp.stage_cost, mdp.gamma, options);
}

PolicySet greedy_policy_set(const Table& Q, double tol) {
    const std::size_t n = Q.rows();
    PolicySet ps;
    ps.sets.resize(n);
    ps.canonical.assign(n, 0);
    ps.infeasible.assign(n, false);
    for (std::size_t s = 0; s < n; ++s) {
        double best = kInf;
        for (double q : Q.row(s)) best = std::min(best, q);
        if (is_inf(best)) {
            ps.infeasible[s] = true;
            continue;
        }
        for (std::size_t a = 0; a < Q.cols(); ++a) {
            if (Q(s, a) <= best + tol) ps.sets[s].push_back(a);
        }
        ps.canonical[s] = ps.sets[s].front();
    }
    return ps;
}

PolicyEvaluation evaluate_policy(const FiniteMDP& mdp, std::span<const std::size_t> policy,
                                 std::span<const double> rho0) {
    const std::size_t n = mdp.n_states();
    if (policy.size() != n || rho0.size() != n) {
        throw Error("ShapeMismatch", "policy and initial distribution must have one entry per state");
    }
    for (std::size_t s = 0; s < n; ++s) {
        if (policy[s] >= mdp.n_actions()) {
            throw Error("IndexOutOfRange", "policy action at state " + std::to_string(s));
        }
    }

    // States that pay +inf now or reach such a state with positive probability.
    std::vector<bool> infinite(n, false);
    for (std::size_t s = 0; s < n; ++s) infinite[s] = is_inf(mdp.stage_cost(s, policy[s]));
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t s = 0; s < n; ++s) {
            if (infinite[s]) continue;
            const auto row = mdp.kernel.row(s, policy[s]);
            for (std::size_t t = 0; t < n; ++t) {
                if (row[t] > 0.0 && infinite[t]) {
                    infinite[s] = true;
                    changed = true;
                    break;
                }
            }
        }
    }

    std::vector<std::size_t> finite_states;
    std::vector<long> local(n, -1);
    for (std::size_t s = 0; s < n; ++s) {
        if (!infinite[s]) {
            local[s] = static_cast<long>(finite_states.size());
            finite_states.push_back(s);
        }
    }

    PolicyEvaluation out;
    out.V.assign(n, kInf);
    const auto k = static_cast<Eigen::Index>(finite_states.size());
    if (k > 0) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(k, k);
        Eigen::VectorXd b(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const std::size_t s = finite_states[static_cast<std::size_t>(i)];
            b(i) = mdp.stage_cost(s, policy[s]);
            const auto row = mdp.kernel.row(s, policy[s]);
            for (std::size_t t = 0; t < n; ++t) {
                if (row[t] != 0.0) A(i, local[t]) -= mdp.gamma * row[t];
            }
        }
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
        Eigen::VectorXd x = lu.solve(b);
        if (k > 2000) {
            for (int pass = 0; pass < 3; ++pass) x += lu.solve(b - A * x);
        }
        const double residual = (A * x - b).lpNorm<Eigen::Infinity>();
        if (!x.allFinite() || !(residual <= 1e-9)) {
            std::ostringstream os;
            os << "policy evaluation residual " << residual;
            throw Error("SingularSystem", os.str());
        }
        for (Eigen::Index i = 0; i < k; ++i) out.V[finite_states[static_cast<std::size_t>(i)]] = x(i);
    }
    out.J = expectation(rho0, out.V);
    return out;
}

Table advantage(const Table& Q, std::span<const double> V, double tol) {
    if (V.size() != Q.rows()) throw Error("ShapeMismatch", "advantage: V and Q disagree on n");
    Table A(Q.rows(), Q.cols());
    for (std::size_t s = 0; s < Q.rows(); ++s) {
        double best = kInf;
        for (double q : Q.row(s)) best = std::min(best, q);
        if (extended_distance(best, V[s]) > tol) {
            std::ostringstream os;
            os << "state " << s << ": V=" << V[s] << " but min_a Q=" << best;
            throw Error("MismatchedPair", os.str());
        }
        for (std::size_t a = 0; a < Q.cols(); ++a) {
            A(s, a) = (is_inf(V[s]) || is_inf(Q(s, a))) ? kInf : Q(s, a) - V[s];
        }
    }
    return A;
}

Table apply_constraints(const Table& L, const Mask& h_violated) {
    if (h_violated.size() != L.rows()) throw Error("ShapeMismatch", "constraint mask rows");
    Table out = L;
    for (std::size_t s = 0; s < L.rows(); ++s) {
        if (h_violated[s].size() != L.cols()) throw Error("ShapeMismatch", "constraint mask cols");
        for (std::size_t a = 0; a < L.cols(); ++a) {
            if (h_violated[s][a]) out(s, a) = kInf;
        }
    }
    return out;
}

}  // namespace optcert
