#include "optcert/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace optcert {

namespace {

void require_valid_kernel(const Kernel& kernel) {
    for (std::size_t s = 0; s < kernel.n_states(); ++s) {
        for (std::size_t a = 0; a < kernel.n_actions(); ++a) {
            double sum = 0.0;
            for (double p : kernel.row(s, a)) {
                if (!(p >= 0.0)) {
                    throw Error("InvalidModel", "negative probability at s=" + std::to_string(s) +
                                                    ",a=" + std::to_string(a));
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                throw Error("InvalidModel", "row not stochastic at s=" + std::to_string(s) +
                                                ",a=" + std::to_string(a));
            }
        }
    }
}

// Q* rebuilt from V* so that synthesis needs nothing but the value function.
Table true_q(const FiniteMDP& mdp, std::span<const double> V_star) {
    return bellman_q(mdp.kernel, mdp.stage_cost, mdp.gamma, V_star);
}

double target_at(const FiniteMDP& mdp, std::span<const double> V_star, std::size_t s,
                 std::size_t a) {
    const double t = expectation(mdp.kernel.row(s, a), V_star);
    if (is_inf(t) && !is_inf(mdp.stage_cost(s, a))) {
        std::ostringstream os;
        os << "E[V*] is unbounded at s=" << s << ",a=" << a << " although L is finite";
        throw Error("UnboundedTarget", os.str());
    }
    return t;
}

void verify(SynthesisReport& report, const FiniteMDP& mdp, std::span<const double> V_star,
            const SolveOptions& options) {
    const StochasticModel kernel = to_stochastic(report.model);
    const SolveReport model_sol = solve_model_mdp(kernel, mdp.stage_cost, mdp.gamma, options);
    report.witnesses = argmin_mismatches(true_q(mdp, V_star), model_sol.Q, options.argmin_tol);
    report.verified = report.witnesses.empty();
}

}  // namespace

StochasticModel as_dirac_kernel(const DeterministicModel& model) {
    const std::size_t n = model.n_states();
    StochasticModel out{Kernel(n, model.n_actions())};
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < model.n_actions(); ++a) {
            const std::size_t next = model(s, a);
            if (next >= n) {
                std::ostringstream os;
                os << "f(" << s << "," << a << ")=" << next << " with n=" << n;
                throw Error("IndexOutOfRange", os.str());
            }
            out.kernel(s, a, next) = 1.0;
        }
    }
    return out;
}

StochasticModel to_stochastic(const PredictiveModel& model) {
    if (const auto* det = std::get_if<DeterministicModel>(&model)) return as_dirac_kernel(*det);
    return std::get<StochasticModel>(model);
}

DeterministicModel expectation_fit(const FiniteMDP& mdp) {
    const std::size_t n = mdp.n_states();
    if (mdp.embeddings.size() != n || n == 0) {
        throw Error("MissingEmbeddings", "expectation fit needs one embedding per state");
    }
    const std::size_t d = mdp.embeddings.front().size();
    DeterministicModel f(n, mdp.n_actions());
    std::vector<double> mean(d);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            std::fill(mean.begin(), mean.end(), 0.0);
            const auto row = mdp.kernel.row(s, a);
            for (std::size_t t = 0; t < n; ++t) {
                if (row[t] == 0.0) continue;
                for (std::size_t k = 0; k < d; ++k) mean[k] += row[t] * mdp.embeddings[t][k];
            }
            double best = kInf;
            std::size_t arg = 0;
            for (std::size_t t = 0; t < n; ++t) {
                double dist2 = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    const double diff = mdp.embeddings[t][k] - mean[k];
                    dist2 += diff * diff;
                }
                if (dist2 < best) {
                    best = dist2;
                    arg = t;
                }
            }
            f(s, a) = arg;
        }
    }
    return f;
}

DeterministicModel mle_fit(const FiniteMDP& mdp) {
    DeterministicModel f(mdp.n_states(), mdp.n_actions());
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            const auto row = mdp.kernel.row(s, a);
            f(s, a) = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        }
    }
    return f;
}

SolveReport solve_model_mdp(const StochasticModel& model, const Table& stage_cost, double gamma,
                            const SolveOptions& options) {
    if (model.kernel.n_states() != stage_cost.rows() || model.kernel.n_actions() != stage_cost.cols()) {
        throw Error("ShapeMismatch", "model kernel and stage cost disagree on (n, m)");
    }
    require_valid_kernel(model.kernel);
    return solve_bellman(model.kernel, stage_cost, gamma, options);
}

SynthesisReport synthesize_value_matched_kernel(const FiniteMDP& mdp, std::span<const double> V_star,
                                                const SolveOptions& options) {
    const std::size_t n = mdp.n_states();
    const std::size_t m = mdp.n_actions();
    StochasticModel model{Kernel(n, m)};
    Table error(n, m, 0.0);

    std::vector<std::size_t> finite_states;
    for (std::size_t s = 0; s < n; ++s) {
        if (!is_inf(V_star[s])) finite_states.push_back(s);
    }

    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < m; ++a) {
            const double t = target_at(mdp, V_star, s, a);
            auto row = model.kernel.row(s, a);
            if (is_inf(t)) {
                // Infinite-cost pair: any row works, keep the true one.
                const auto truth = mdp.kernel.row(s, a);
                std::copy(truth.begin(), truth.end(), row.begin());
                error(s, a) = kInf;
                continue;
            }

            const double eq_tol = 1e-12 * std::max(1.0, std::abs(t));
            std::size_t exact = n;
            std::size_t lo = n;
            std::size_t hi = n;
            for (std::size_t i : finite_states) {
                const double v = V_star[i];
                if (exact == n && std::abs(v - t) <= eq_tol) exact = i;
                if (v <= t && (lo == n || v > V_star[lo])) lo = i;
                if (v >= t && (hi == n || v < V_star[hi])) hi = i;
            }
            if (exact != n) {
                row[exact] = 1.0;
            } else if (lo == n || hi == n) {
                row[lo == n ? hi : lo] = 1.0;
            } else {
                const double w_hi = (t - V_star[lo]) / (V_star[hi] - V_star[lo]);
                row[hi] = w_hi;
                row[lo] = 1.0 - w_hi;
            }
            error(s, a) = std::abs(t - expectation(row, V_star));
        }
    }

    SynthesisReport report{std::move(model), std::move(error), false, {}};
    verify(report, mdp, V_star, options);
    return report;
}

SynthesisReport synthesize_value_matched_deterministic(const FiniteMDP& mdp,
                                                       std::span<const double> V_star,
                                                       const SolveOptions& options) {
    const std::size_t n = mdp.n_states();
    const std::size_t m = mdp.n_actions();
    DeterministicModel f(n, m);
    Table error(n, m, 0.0);
    const DeterministicModel fallback = mle_fit(mdp);

    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < m; ++a) {
            const double t = target_at(mdp, V_star, s, a);
            if (is_inf(t)) {
                f(s, a) = fallback(s, a);
                error(s, a) = kInf;
                continue;
            }
            double best = kInf;
            std::size_t arg = fallback(s, a);
            for (std::size_t i = 0; i < n; ++i) {
                if (is_inf(V_star[i])) continue;
                const double d = std::abs(V_star[i] - t);
                if (d < best) {
                    best = d;
                    arg = i;
                }
            }
            f(s, a) = arg;
            error(s, a) = best;
        }
    }

    SynthesisReport report{std::move(f), std::move(error), false, {}};
    verify(report, mdp, V_star, options);
    return report;
}

std::vector<std::size_t> check_assumption_omega(const StochasticModel& model,
                                                std::span<const double> V_hat,
                                                std::span<const std::size_t> pi_star,
                                                std::size_t horizon) {
    const std::size_t n = model.kernel.n_states();
    // bad[s]: some state visited within the current number of steps has V-hat = +inf.
    std::vector<bool> bad(n);
    for (std::size_t s = 0; s < n; ++s) bad[s] = is_inf(V_hat[s]);
    for (std::size_t step = 1; step < horizon; ++step) {
        std::vector<bool> next = bad;
        for (std::size_t s = 0; s < n; ++s) {
            if (next[s]) continue;
            const auto row = model.kernel.row(s, pi_star[s]);
            for (std::size_t t = 0; t < n; ++t) {
                if (row[t] > 0.0 && bad[t]) {
                    next[s] = true;
                    break;
                }
            }
        }
        if (next == bad) break;
        bad = std::move(next);
    }
    std::vector<std::size_t> omega;
    for (std::size_t s = 0; s < n; ++s) {
        if (!bad[s]) omega.push_back(s);
    }
    return omega;
}

std::vector<PairWitness> argmin_mismatches(const Table& Q_true, const Table& Q_model, double tol) {
    const PolicySet truth = greedy_policy_set(Q_true, tol);
    const PolicySet model = greedy_policy_set(Q_model, tol);
    const ValueFunction v_true = row_min(Q_true);
    const ValueFunction v_model = row_min(Q_model);

    std::vector<PairWitness> out;
    for (std::size_t s = 0; s < Q_true.rows(); ++s) {
        if (truth.infeasible[s] || model.infeasible[s]) continue;
        for (std::size_t a = 0; a < Q_true.cols(); ++a) {
            const bool in_true = std::ranges::find(truth.sets[s], a) != truth.sets[s].end();
            const bool in_model = std::ranges::find(model.sets[s], a) != model.sets[s].end();
            if (in_true == in_model) continue;
            PairWitness w;
            w.state = s;
            w.action = a;
            w.reason = in_model ? "model argmin not optimal" : "optimal action missing from model argmin";
            w.true_advantage = is_inf(Q_true(s, a)) ? kInf : Q_true(s, a) - v_true[s];
            w.model_advantage = is_inf(Q_model(s, a)) ? kInf : Q_model(s, a) - v_model[s];
            out.push_back(std::move(w));
        }
    }
    return out;
}

}  // namespace optcert
