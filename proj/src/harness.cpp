#include "optcert/harness.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace optcert {

namespace {

std::mt19937_64 episode_stream(std::uint64_t seed, std::uint64_t episode) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(episode), static_cast<std::uint32_t>(episode >> 32)};
    return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t sample(std::span<const double> probs, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        acc += probs[i];
        last = i;
        if (u < acc) return i;
    }
    return last;
}

}  // namespace

MonteCarloEstimate simulate_closed_loop(const FiniteMDP& mdp, std::span<const std::size_t> policy,
                                        std::size_t truncation, std::size_t episodes, std::uint64_t seed,
                                        unsigned threads) {
    MonteCarloEstimate est;
    est.episodes = episodes;
    est.truncation = truncation;
    est.seed = seed;

    double max_cost = 0.0;
    for (double c : mdp.stage_cost.data()) {
        if (!is_inf(c)) max_cost = std::max(max_cost, std::abs(c));
    }
    est.truncation_bound = std::pow(mdp.gamma, static_cast<double>(truncation)) * max_cost / (1.0 - mdp.gamma);
    if (episodes == 0) return est;

    std::vector<double> returns(episodes);
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t ep = begin; ep < end; ++ep) {
            auto rng = episode_stream(seed, ep);
            std::size_t s = sample(mdp.initial_distribution, rng);
            double ret = 0.0;
            double discount = 1.0;
            for (std::size_t k = 0; k < truncation; ++k) {
                const std::size_t a = policy[s];
                const double c = mdp.stage_cost(s, a);
                if (is_inf(c)) {
                    ret = kInf;
                    break;
                }
                ret += discount * c;
                discount *= mdp.gamma;
                s = sample(mdp.kernel.row(s, a), rng);
            }
            returns[ep] = ret;
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, episodes));
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (episodes + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(episodes, begin + chunk);
            if (begin < end) pool.emplace_back(run, begin, end);
        }
    }

    // Ordered reduction keeps the estimate bit-identical for any thread count.
    double sum = 0.0;
    for (double r : returns) sum += r;
    est.mean = sum / static_cast<double>(episodes);
    if (is_inf(est.mean)) {
        est.std_error = kInf;
    } else if (episodes > 1) {
        double ss = 0.0;
        for (double r : returns) ss += (r - est.mean) * (r - est.mean);
        est.std_error = std::sqrt(ss / static_cast<double>(episodes - 1) / static_cast<double>(episodes));
    }
    return est;
}

ModelSpec ModelSpec::parse(const std::string& text) {
    ModelSpec spec;
    if (text == "expectation" || text == "expectation-fit") spec.kind = Kind::Expectation;
    else if (text == "mle" || text == "mle-fit") spec.kind = Kind::Mle;
    else if (text == "synthesized-kernel") spec.kind = Kind::SynthesizedKernel;
    else if (text == "synthesized-deterministic") spec.kind = Kind::SynthesizedDeterministic;
    else if (text == "perfect") spec.kind = Kind::Perfect;
    else if (text.starts_with("file:") && text.size() > 5) {
        spec.kind = Kind::File;
        spec.path = text.substr(5);
    } else {
        throw Error("UsageError", "unknown model spec '" + text + "'");
    }
    return spec;
}

std::string ModelSpec::name() const {
    switch (kind) {
        case Kind::Expectation: return "expectation";
        case Kind::Mle: return "mle";
        case Kind::SynthesizedKernel: return "synthesized-kernel";
        case Kind::SynthesizedDeterministic: return "synthesized-deterministic";
        case Kind::Perfect: return "perfect";
        case Kind::File: return "file:" + path;
    }
    return "?";
}

BuiltModel build_model(const ModelSpec& spec, const FiniteMDP& mdp, std::span<const double> V_star,
                       const SolveOptions& options) {
    switch (spec.kind) {
        case ModelSpec::Kind::Expectation: return {expectation_fit(mdp), std::nullopt};
        case ModelSpec::Kind::Mle: return {mle_fit(mdp), std::nullopt};
        case ModelSpec::Kind::Perfect: return {StochasticModel{mdp.kernel}, std::nullopt};
        case ModelSpec::Kind::File: return {load_model(spec.path, mdp.n_states(), mdp.n_actions()), std::nullopt};
        case ModelSpec::Kind::SynthesizedKernel: {
            auto rep = synthesize_value_matched_kernel(mdp, V_star, options);
            return {rep.model, std::move(rep)};
        }
        case ModelSpec::Kind::SynthesizedDeterministic: {
            auto rep = synthesize_value_matched_deterministic(mdp, V_star, options);
            return {rep.model, std::move(rep)};
        }
    }
    throw Error("UsageError", "unhandled model spec");
}

ComparisonReport compare_models(const Scenario& scenario, const std::vector<ModelSpec>& specs,
                                const CertifyOptions& options) {
    const FiniteMDP mdp = scenario.mdp();
    ComparisonReport report;
    report.scenario = scenario.name;
    report.optimal = value_iteration(mdp, options.solve);
    report.optimal_evaluation = evaluate_policy(mdp, report.optimal.policy.canonical, mdp.initial_distribution);
    const double J_star = report.optimal_evaluation.J;

    for (const auto& spec : specs) {
        ModelOutcome out;
        out.spec = spec.name();
        out.built = build_model(spec, mdp, report.optimal.V, options.solve);
        const StochasticModel kernel = to_stochastic(out.built.model);
        out.certificate = certify_argmin_equivalence(mdp, kernel, options);
        out.delta = check_sufficient_delta(mdp, kernel, report.optimal.V, options.solve.argmin_tol);
        out.canonical_policy = out.certificate.model_solution.policy.canonical;
        out.J = evaluate_policy(mdp, out.canonical_policy, mdp.initial_distribution).J;
        out.gap = (is_inf(out.J) && is_inf(J_star)) ? 0.0 : out.J - J_star;
        report.models.push_back(std::move(out));
    }
    std::ranges::stable_sort(report.models, {}, &ModelOutcome::gap);
    return report;
}

std::vector<ModelSpec> baseline_specs() {
    return {ModelSpec{ModelSpec::Kind::Perfect, {}}, ModelSpec{ModelSpec::Kind::SynthesizedKernel, {}},
            ModelSpec{ModelSpec::Kind::Expectation, {}}, ModelSpec{ModelSpec::Kind::Mle, {}}};
}

ComparisonReport run_builtin(std::string_view name, const CertifyOptions& options) {
    return compare_models(builtin_scenario(name), baseline_specs(), options);
}

}  // namespace optcert
