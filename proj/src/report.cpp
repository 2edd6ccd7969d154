#include "optcert/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json_io.hpp"
#include "optcert/mpc.hpp"

namespace optcert {

using json_io::number;
using json_io::numbers;
using nlohmann::ordered_json;

namespace {

struct Labels {
    const std::vector<std::string>& states;
    const std::vector<std::string>& actions;
};

Labels labels_of(const Scenario& sc) { return {sc.state_labels, sc.action_labels}; }

ordered_json header(const char* command, const Scenario& sc) {
    ordered_json j;
    j["command"] = command;
    j["scenario"] = sc.name;
    j["states"] = sc.state_labels;
    j["actions"] = sc.action_labels;
    return j;
}

ordered_json policy_json(const PolicySet& p, const Labels& lb) {
    ordered_json sets = ordered_json::array();
    for (std::size_t s = 0; s < p.n_states(); ++s) {
        ordered_json row = ordered_json::array();
        for (std::size_t a : p.sets[s]) row.push_back(lb.actions[a]);
        sets.push_back(std::move(row));
    }
    ordered_json canonical = ordered_json::array();
    for (std::size_t s = 0; s < p.n_states(); ++s) {
        canonical.push_back(p.infeasible[s] ? ordered_json(nullptr) : ordered_json(lb.actions[p.canonical[s]]));
    }
    return {{"argmin_sets", std::move(sets)}, {"canonical", std::move(canonical)}};
}

ordered_json witness_json(const PairWitness& w, const Labels& lb) {
    ordered_json j;
    j["state"] = lb.states[w.state];
    j["action"] = lb.actions[w.action];
    j["reason"] = w.reason;
    j["true_advantage"] = number(w.true_advantage);
    j["model_advantage"] = number(w.model_advantage);
    return j;
}

ordered_json witnesses_json(const std::vector<PairWitness>& ws, const Labels& lb) {
    ordered_json out = ordered_json::array();
    for (const auto& w : ws) out.push_back(witness_json(w, lb));
    return out;
}

ordered_json envelope_json(const std::optional<KFunctionEnvelope>& env) {
    if (!env) return nullptr;
    ordered_json pts = ordered_json::array();
    for (const auto& [x, y] : env->breakpoints) pts.push_back({number(x), number(y)});
    ordered_json j;
    j["kind"] = env->kind == KFunctionEnvelope::Kind::Lower ? "lower" : "upper";
    j["breakpoints"] = std::move(pts);
    j["extension_slope"] = env->extension_slope;
    return j;
}

ordered_json lambda_json(const LambdaShift& l) {
    ordered_json out = ordered_json::array();
    for (std::size_t s = 0; s < l.values.size(); ++s) out.push_back(l.domain[s] ? number(l.values[s]) : ordered_json(nullptr));
    return out;
}

ordered_json solution_json(const SolveReport& r, const Labels& lb) {
    ordered_json j;
    j["V"] = numbers(r.V);
    j["Q"] = json_io::table(r.Q);
    j["policy"] = policy_json(r.policy, lb);
    j["bellman_residual"] = r.bellman_residual;
    j["iterations"] = r.iterations;
    return j;
}

ordered_json certificate_json(const CertificateReport& c, const Labels& lb) {
    ordered_json j;
    j["verdict"] = to_string(c.verdict);
    j["argmin_sets_equal"] = c.argmin_sets_equal;
    ordered_json omega = ordered_json::array();
    for (std::size_t s : c.omega) omega.push_back(lb.states[s]);
    j["omega"] = std::move(omega);
    j["witnesses"] = witnesses_json(c.witnesses, lb);
    j["lambda"] = lambda_json(c.lambda);
    j["Lambda"] = json_io::table(c.Lambda);
    j["alpha"] = envelope_json(c.alpha);
    j["beta"] = envelope_json(c.beta);
    j["modified_bellman_residual"] = c.modified_bellman_residual;
    j["sandwich_slack"] = c.sandwich_slack;
    j["V_star"] = numbers(c.true_solution.V);
    j["V_hat"] = numbers(c.model_solution.V);
    j["policy_star"] = policy_json(c.true_solution.policy, lb);
    j["policy_hat"] = policy_json(c.model_solution.policy, lb);
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

ordered_json delta_json(const DeltaCheck& d, const Labels& lb) {
    ordered_json j;
    j["constant"] = d.constant;
    j["delta"] = d.constant ? number(d.delta) : ordered_json(nullptr);
    j["spread"] = number(d.spread);
    j["min_pair"] = {lb.states[d.min_pair.first], lb.actions[d.min_pair.second]};
    j["max_pair"] = {lb.states[d.max_pair.first], lb.actions[d.max_pair.second]};
    j["D"] = json_io::table(d.D);
    return j;
}

std::string fmt(double x, int precision = 4) {
    if (is_inf(x)) return "inf";
    if (std::abs(x) < 0.5 * std::pow(10.0, -precision)) x = 0.0;
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << x;
    return os.str();
}

std::string join_policy(const PolicySet& p, const Labels& lb) {
    std::ostringstream os;
    for (std::size_t s = 0; s < p.n_states(); ++s) {
        os << (s ? " " : "") << lb.states[s] << ":";
        if (p.infeasible[s]) {
            os << "-";
            continue;
        }
        os << "{";
        for (std::size_t i = 0; i < p.sets[s].size(); ++i) os << (i ? "," : "") << lb.actions[p.sets[s][i]];
        os << "}";
    }
    return os.str();
}

std::string join_values(std::span<const double> v) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << fmt(v[i]);
    os << "]";
    return os.str();
}

void render_witnesses(std::ostream& os, const std::vector<PairWitness>& ws, const Labels& lb) {
    for (const auto& w : ws) {
        os << "  witness (" << lb.states[w.state] << "," << lb.actions[w.action] << "): " << w.reason
           << "  A*=" << fmt(w.true_advantage) << "  A-hat=" << fmt(w.model_advantage) << "\n";
    }
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ValueFunction terminal_from_file(const std::string& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) throw Error("FileNotFound", path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const ordered_json::parse_error& e) {
        throw Error("ParseError", path + ": " + e.what());
    }
    if (!j.is_array() || j.size() != n) throw Error("ParseError", path + ": expected an array of " + std::to_string(n) + " values");
    ValueFunction T;
    for (const auto& x : j) {
        if (x.is_number()) T.push_back(x.get<double>());
        else if (x.is_string() && x.get<std::string>() == "inf") T.push_back(kInf);
        else throw Error("ParseError", path + ": expected numbers or \"inf\"");
    }
    return T;
}

std::size_t action_index(const std::string& token, const Labels& lb) {
    const auto it = std::ranges::find(lb.actions, token);
    if (it != lb.actions.end()) return static_cast<std::size_t>(it - lb.actions.begin());
    try {
        std::size_t pos = 0;
        const auto idx = std::stoul(token, &pos);
        if (pos == token.size() && idx < lb.actions.size()) return idx;
    } catch (const std::exception&) {
    }
    throw Error("UsageError", "unknown action '" + token + "'");
}

}  // namespace

Report solve_report(const Scenario& sc, const SolveOptions& options) {
    const FiniteMDP mdp = sc.mdp();
    const Labels lb = labels_of(sc);
    const SolveReport sol = value_iteration(mdp, options);
    const PolicyEvaluation ev = evaluate_policy(mdp, sol.policy.canonical, mdp.initial_distribution);

    ordered_json j = header("solve", sc);
    j["solution"] = solution_json(sol, lb);
    j["advantage"] = json_io::table(advantage(sol.Q, sol.V, options.argmin_tol));
    j["J"] = number(ev.J);

    std::ostringstream t;
    t << "scenario " << sc.name << " (gamma " << sc.gamma << ")\n";
    t << "V*      " << join_values(sol.V) << "\n";
    t << "pi*     " << join_policy(sol.policy, lb) << "\n";
    t << "J(pi*)  " << fmt(ev.J) << "\n";
    t << "residual " << sol.bellman_residual << " after " << sol.iterations << " sweeps\n";
    return {dump(j), t.str(), false};
}

Report certify_report(const Scenario& sc, const ModelSpec& spec, const CertifyOptions& options) {
    const FiniteMDP mdp = sc.mdp();
    const Labels lb = labels_of(sc);
    const SolveReport truth = value_iteration(mdp, options.solve);
    const BuiltModel built = build_model(spec, mdp, truth.V, options.solve);
    const CertificateReport cert = certify_argmin_equivalence(mdp, to_stochastic(built.model), options);

    ordered_json j = header("certify", sc);
    j["model"] = spec.name();
    j["certificate"] = certificate_json(cert, lb);

    std::ostringstream t;
    t << "model " << spec.name() << " on " << sc.name << ": " << to_string(cert.verdict) << "\n";
    t << "pi*     " << join_policy(cert.true_solution.policy, lb) << "\n";
    t << "pi-hat  " << join_policy(cert.model_solution.policy, lb) << "\n";
    t << "modified Bellman residual " << cert.modified_bellman_residual << "\n";
    if (!cert.note.empty()) t << "note: " << cert.note << "\n";
    render_witnesses(t, cert.witnesses, lb);
    return {dump(j), t.str(), cert.verdict != Verdict::Certified};
}

Report suffcheck_report(const Scenario& sc, const ModelSpec& spec, const SolveOptions& options) {
    const FiniteMDP mdp = sc.mdp();
    const Labels lb = labels_of(sc);
    const SolveReport truth = value_iteration(mdp, options);
    const BuiltModel built = build_model(spec, mdp, truth.V, options);
    const DeltaCheck d = check_sufficient_delta(mdp, to_stochastic(built.model), truth.V, options.argmin_tol);

    ordered_json j = header("suffcheck", sc);
    j["model"] = spec.name();
    j["delta_check"] = delta_json(d, lb);

    std::ostringstream t;
    t << "model " << spec.name() << " on " << sc.name << ": ";
    if (d.constant) t << "constant offset, Delta = " << fmt(d.delta, 10) << "\n";
    else {
        t << "not constant, spread " << fmt(d.spread) << "\n";
        t << "  min D at (" << lb.states[d.min_pair.first] << "," << lb.actions[d.min_pair.second] << ") = "
          << fmt(d.D(d.min_pair.first, d.min_pair.second)) << "\n";
        t << "  max D at (" << lb.states[d.max_pair.first] << "," << lb.actions[d.max_pair.second] << ") = "
          << fmt(d.D(d.max_pair.first, d.max_pair.second)) << "\n";
    }
    return {dump(j), t.str(), !d.constant};
}

Report synthesize_report(const Scenario& sc, bool deterministic, const SolveOptions& options) {
    const FiniteMDP mdp = sc.mdp();
    const Labels lb = labels_of(sc);
    const SolveReport truth = value_iteration(mdp, options);
    const SynthesisReport rep = deterministic ? synthesize_value_matched_deterministic(mdp, truth.V, options)
                                              : synthesize_value_matched_kernel(mdp, truth.V, options);

    ordered_json j = header("synthesize", sc);
    j["deterministic"] = deterministic;
    j["verified"] = rep.verified;
    j["matching_error"] = json_io::table(rep.matching_error);
    j["witnesses"] = witnesses_json(rep.witnesses, lb);
    j["model"] = json_io::model(rep.model);

    double worst = 0.0;
    for (double e : rep.matching_error.data()) {
        if (!is_inf(e)) worst = std::max(worst, e);
    }
    std::ostringstream t;
    t << (deterministic ? "deterministic" : "stochastic") << " value-matched model for " << sc.name
      << ": verified=" << (rep.verified ? "true" : "false") << ", max matching error " << worst << "\n";
    if (const auto* f = std::get_if<DeterministicModel>(&rep.model)) {
        for (std::size_t s = 0; s < f->n_states(); ++s) {
            t << "  " << lb.states[s] << ":";
            for (std::size_t a = 0; a < f->n_actions(); ++a) t << " " << lb.actions[a] << "->" << lb.states[(*f)(s, a)];
            t << "\n";
        }
    }
    render_witnesses(t, rep.witnesses, lb);
    return {dump(j), t.str(), !rep.verified};
}

Report mpc_report(const Scenario& sc, const ModelSpec& spec, std::size_t horizon, const std::string& terminal,
                  const SolveOptions& options) {
    const FiniteMDP mdp = sc.mdp();
    const Labels lb = labels_of(sc);
    const std::size_t n = mdp.n_states();
    const SolveReport truth = value_iteration(mdp, options);
    const BuiltModel built = build_model(spec, mdp, truth.V, options);
    const auto* f = std::get_if<DeterministicModel>(&built.model);
    if (f == nullptr) throw Error("UsageError", "MPC needs a deterministic model; '" + spec.name() + "' is stochastic");
    const SolveReport model_sol = solve_model_mdp(as_dirac_kernel(*f), mdp.stage_cost, mdp.gamma, options);

    MPCScheme scheme;
    scheme.model = *f;
    scheme.stage_cost = mdp.stage_cost;
    scheme.gamma = mdp.gamma;
    scheme.horizon = horizon != 0 ? horizon : (sc.mpc ? sc.mpc->horizon : 0);
    if (scheme.horizon == 0) throw Error("UsageError", "--horizon is required when the scenario has no mpc block");
    if (sc.mpc) scheme.terminal_set = sc.mpc->terminal_set;

    std::string terminal_used = terminal;
    if (terminal == "scenario") {
        if (sc.mpc && !sc.mpc->terminal_cost.empty()) scheme.terminal_cost = sc.mpc->terminal_cost;
        else terminal_used = "vhat";
    }
    if (terminal_used == "vhat") scheme.terminal_cost = model_sol.V;
    else if (terminal_used == "zero") scheme.terminal_cost.assign(n, 0.0);
    else if (terminal_used.starts_with("file:")) scheme.terminal_cost = terminal_from_file(terminal_used.substr(5), n);
    else if (terminal_used != "scenario") throw Error("UsageError", "unknown terminal '" + terminal + "'");

    const MPCTables tables = build_mpc_tables(scheme, options.argmin_tol);
    const PolicySet policy = mpc_policy(tables, options.argmin_tol);
    const EquivalenceCheck eq = mpc_equals_model_mdp_check(tables, model_sol.Q);
    const PolicyEvaluation closed_loop = evaluate_policy(mdp, policy.canonical, mdp.initial_distribution);

    ordered_json j = header("mpc", sc);
    j["model"] = spec.name();
    j["horizon"] = scheme.horizon;
    j["terminal"] = terminal_used;
    j["terminal_cost"] = numbers(scheme.folded_terminal_cost());
    j["V_mpc"] = numbers(tables.V_mpc());
    j["Q_mpc"] = json_io::table(tables.Q0);
    j["policy"] = policy_json(policy, lb);
    j["equals_model_mdp"] = {{"equal", eq.equal}, {"max_deviation", number(eq.max_deviation)}};

    ordered_json residuals = ordered_json::array();
    std::vector<std::pair<std::string, LambdaShift>> shifts{
        {"zero", LambdaShift::everywhere(std::vector<double>(n, 0.0))},
        {"constant", LambdaShift::everywhere(std::vector<double>(n, 1.0))}};
    try {
        shifts.emplace_back("value_matching", lambda_value_matching(truth.V, model_sol.V, model_sol.Q).lambda);
    } catch (const Error&) {
    }
    for (const auto& [name, lambda] : shifts) {
        residuals.push_back({{"lambda", name},
                             {"tail", number(mpc_modified_bellman_residual(scheme, tables, lambda, ValueReading::Tail))},
                             {"stationary", number(mpc_modified_bellman_residual(scheme, tables, lambda, ValueReading::Stationary))}});
    }
    j["modified_bellman_residuals"] = std::move(residuals);

    ordered_json open_loop = ordered_json::array();
    for (std::size_t s = 0; s < n; ++s) {
        if (mdp.initial_distribution[s] <= 0.0 || is_inf(tables.V_mpc()[s])) continue;
        const OpenLoopSolution ol = open_loop_solve(scheme, tables, s, options.argmin_tol);
        ordered_json states = ordered_json::array();
        for (std::size_t x : ol.states) states.push_back(lb.states[x]);
        ordered_json inputs = ordered_json::array();
        for (std::size_t a : ol.inputs) inputs.push_back(lb.actions[a]);
        open_loop.push_back({{"initial_state", lb.states[s]}, {"states", states}, {"inputs", inputs}, {"objective", number(ol.objective)}});
    }
    j["open_loop"] = std::move(open_loop);
    j["closed_loop_J"] = number(closed_loop.J);
    j["optimal_J"] = number(evaluate_policy(mdp, truth.policy.canonical, mdp.initial_distribution).J);

    std::ostringstream t;
    t << "MPC on " << sc.name << " with model " << spec.name() << ", N=" << scheme.horizon << ", terminal " << terminal_used << "\n";
    t << "V^MPC   " << join_values(tables.V_mpc()) << "\n";
    t << "policy  " << join_policy(policy, lb) << "\n";
    t << "Q^MPC vs Q-hat*: max deviation " << fmt(eq.max_deviation, 12) << (eq.equal ? " (equal)" : " (differs)") << "\n";
    t << "closed-loop J " << fmt(closed_loop.J) << "\n";
    return {dump(j), t.str(), false};
}

Report simulate_report(const Scenario& sc, const std::string& policy_spec, std::size_t episodes, std::uint64_t seed,
                       std::size_t truncation, const SolveOptions& options) {
    const FiniteMDP mdp = sc.mdp();
    const Labels lb = labels_of(sc);
    Policy policy;
    if (policy_spec == "optimal") {
        policy = value_iteration(mdp, options).policy.canonical;
    } else if (policy_spec.starts_with("model:")) {
        const ModelSpec spec = ModelSpec::parse(policy_spec.substr(6));
        const SolveReport truth = value_iteration(mdp, options);
        const BuiltModel built = build_model(spec, mdp, truth.V, options);
        policy = solve_model_mdp(to_stochastic(built.model), mdp.stage_cost, mdp.gamma, options).policy.canonical;
    } else if (policy_spec.starts_with("actions:")) {
        std::stringstream ss(policy_spec.substr(8));
        std::string token;
        while (std::getline(ss, token, ',')) policy.push_back(action_index(token, lb));
        if (policy.size() != mdp.n_states()) throw Error("UsageError", "policy needs one action per state");
    } else {
        throw Error("UsageError", "unknown policy spec '" + policy_spec + "'");
    }

    const MonteCarloEstimate est = simulate_closed_loop(mdp, policy, truncation, episodes, seed);
    const PolicyEvaluation exact = evaluate_policy(mdp, policy, mdp.initial_distribution);
    const double band = 3.0 * est.std_error + est.truncation_bound + 1e-9 * std::max(1.0, std::abs(exact.J));
    const bool consistent = extended_distance(est.mean, exact.J) <= band;

    ordered_json j = header("simulate", sc);
    ordered_json pj = ordered_json::array();
    for (std::size_t a : policy) pj.push_back(lb.actions[a]);
    j["policy"] = std::move(pj);
    j["estimate"] = {{"mean", number(est.mean)},
                     {"std_error", number(est.std_error)},
                     {"episodes", est.episodes},
                     {"truncation", est.truncation},
                     {"truncation_bound", number(est.truncation_bound)},
                     {"seed", est.seed}};
    j["exact_J"] = number(exact.J);
    j["consistent"] = consistent;

    std::ostringstream t;
    t << "Monte Carlo on " << sc.name << ": mean " << fmt(est.mean, 6) << " +/- " << fmt(est.std_error, 6)
      << " (" << episodes << " episodes, K=" << truncation << ", seed " << seed << ")\n";
    t << "exact J " << fmt(exact.J, 6) << ", truncation bound " << est.truncation_bound
      << (consistent ? ", consistent" : ", OUTSIDE 3 stderr + bound") << "\n";
    return {dump(j), t.str(), false};
}

Report compare_report(const Scenario& sc, const std::vector<ModelSpec>& specs, const CertifyOptions& options) {
    const Labels lb = labels_of(sc);
    const ComparisonReport rep = compare_models(sc, specs, options);

    ordered_json j = header("compare", sc);
    j["V_star"] = numbers(rep.optimal.V);
    j["policy_star"] = policy_json(rep.optimal.policy, lb);
    j["J_star"] = number(rep.optimal_evaluation.J);
    ordered_json models = ordered_json::array();
    for (const auto& m : rep.models) {
        ordered_json mj;
        mj["model"] = m.spec;
        mj["J"] = number(m.J);
        mj["gap"] = number(m.gap);
        mj["verdict"] = to_string(m.certificate.verdict);
        mj["argmin_sets_equal"] = m.certificate.argmin_sets_equal;
        mj["delta_check"] = {{"constant", m.delta.constant},
                             {"delta", m.delta.constant ? number(m.delta.delta) : ordered_json(nullptr)},
                             {"spread", number(m.delta.spread)}};
        if (m.built.synthesis) {
            mj["synthesis_verified"] = m.built.synthesis->verified;
            mj["synthesis_witnesses"] = witnesses_json(m.built.synthesis->witnesses, lb);
        }
        ordered_json pol = ordered_json::array();
        for (std::size_t a : m.canonical_policy) pol.push_back(lb.actions[a]);
        mj["policy"] = std::move(pol);
        mj["witnesses"] = witnesses_json(m.certificate.witnesses, lb);
        models.push_back(std::move(mj));
    }
    j["models"] = std::move(models);

    std::ostringstream t;
    t << "scenario " << sc.name << "   J(pi*) = " << fmt(rep.optimal_evaluation.J) << "\n";
    t << "pi*  " << join_policy(rep.optimal.policy, lb) << "\n\n";
    t << std::left << std::setw(28) << "model" << std::setw(12) << "J" << std::setw(12) << "gap"
      << std::setw(14) << "verdict" << "delta\n";
    for (const auto& m : rep.models) {
        t << std::left << std::setw(28) << m.spec << std::setw(12) << fmt(m.J) << std::setw(12) << fmt(m.gap)
          << std::setw(14) << to_string(m.certificate.verdict)
          << (m.delta.constant ? fmt(m.delta.delta, 6) : std::string("not constant")) << "\n";
    }
    for (const auto& m : rep.models) {
        if (m.certificate.witnesses.empty()) continue;
        t << "\n" << m.spec << ":\n";
        render_witnesses(t, m.certificate.witnesses, lb);
    }
    return {dump(j), t.str(), false};
}

}  // namespace optcert
