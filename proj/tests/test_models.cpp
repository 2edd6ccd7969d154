#include <doctest.h>

#include "optcert/scenario.hpp"
#include "test_support.hpp"

using namespace optcert;
using namespace testing;

namespace {

FiniteMDP swamp5() { return builtin_scenario("swamp5").mdp(); }

double expected_under(const Kernel& k, std::size_t s, std::size_t a, std::span<const double> V) {
    return expectation(k.row(s, a), V);
}

}  // namespace

TEST_CASE("as_dirac_kernel") {
    DeterministicModel f(3, 2);
    f(0, 0) = 2;
    f(0, 1) = 1;
    f(1, 0) = 0;
    f(1, 1) = 1;
    f(2, 0) = 2;
    f(2, 1) = 0;
    const auto k = as_dirac_kernel(f).kernel;
    for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t a = 0; a < 2; ++a) {
            for (std::size_t x = 0; x < 3; ++x) CHECK(k(s, a, x) == (x == f(s, a) ? 1.0 : 0.0));
        }
    }
    f(2, 1) = 3;
    CHECK_THROWS_AS(as_dirac_kernel(f), Error);
}

TEST_CASE("property: Dirac consistency") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + pick(rng, 12);
        const std::size_t m = 1 + pick(rng, 4);
        DeterministicModel f(n, m);
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t a = 0; a < m; ++a) f(s, a) = pick(rng, n);
        std::vector<double> V(n);
        for (auto& v : V) v = uniform(rng, -10, 10);
        if (n > 1) V[pick(rng, n)] = kInf;
        const auto k = as_dirac_kernel(f).kernel;
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t a = 0; a < m; ++a) CHECK(expected_under(k, s, a, V) == V[f(s, a)]);
    }
}

TEST_CASE("expectation_fit") {
    const FiniteMDP mdp = swamp5();
    const auto f = expectation_fit(mdp);
    for (std::size_t s = 0; s < 4; ++s) {
        CHECK(f(s, kRisky) == 2);
        CHECK(f(s, kSafe) == s + 1);
    }
    CHECK(f(4, kSafe) == 4);

    FiniteMDP two;
    two.kernel = Kernel(2, 1);
    two.kernel(0, 0, 0) = 0.5;
    two.kernel(0, 0, 1) = 0.5;
    two.kernel(1, 0, 1) = 1.0;
    two.stage_cost = Table(2, 1, 1.0);
    two.embeddings = {{0.0}, {1.0}};
    two.initial_distribution = {0.5, 0.5};
    CHECK(expectation_fit(two)(0, 0) == 0);

    FiniteMDP no_embed = mdp;
    no_embed.embeddings.clear();
    try {
        expectation_fit(no_embed);
        FAIL("expected MissingEmbeddings");
    } catch (const Error& e) {
        CHECK(e.kind() == "MissingEmbeddings");
    }
}

TEST_CASE("mle_fit") {
    const auto f = mle_fit(swamp5());
    for (std::size_t s = 0; s < 4; ++s) {
        CHECK(f(s, kRisky) == 0);
        CHECK(f(s, kSafe) == s + 1);
    }
    FiniteMDP row;
    row.kernel = Kernel(2, 1);
    row.kernel(0, 0, 0) = 0.2;
    row.kernel(0, 0, 1) = 0.8;
    row.kernel(1, 0, 1) = 1.0;
    row.stage_cost = Table(2, 1, 0.0);
    row.initial_distribution = {1.0, 0.0};
    CHECK(mle_fit(row)(0, 0) == 1);
}

TEST_CASE("property: fit determinism including ties") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        const FiniteMDP mdp = random_mdp(rng, {15, 3, 0.9, 0.0});
        CHECK(expectation_fit(mdp) == expectation_fit(mdp));
        CHECK(mle_fit(mdp) == mle_fit(mdp));
    }
}

TEST_CASE("solve_model_mdp") {
    const FiniteMDP mdp = swamp5();
    const auto truth = value_iteration(mdp);
    const auto perfect = solve_model_mdp({mdp.kernel}, mdp.stage_cost, mdp.gamma);
    CHECK(perfect.V == truth.V);
    CHECK(perfect.Q == truth.Q);

    const auto hat = solve_model_mdp(as_dirac_kernel(expectation_fit(mdp)), mdp.stage_cost, mdp.gamma);
    const std::vector<double> expected{6.31, 6.31, 5.9, 1.0, 0.0};
    for (std::size_t s = 0; s < 5; ++s) CHECK(std::abs(hat.V[s] - expected[s]) <= 1e-9);
    CHECK(std::abs(hat.Q(0, kSafe) - 6.679) <= 1e-9);
    CHECK(std::abs(hat.Q(2, kRisky) - 10.31) <= 1e-9);

    const auto synth = synthesize_value_matched_kernel(mdp, truth.V);
    const auto sv = solve_model_mdp(to_stochastic(synth.model), mdp.stage_cost, mdp.gamma);
    CHECK(max_abs_diff(sv.V, truth.V) <= 1e-8);

    CHECK_THROWS_AS(solve_model_mdp({Kernel(3, 2)}, mdp.stage_cost, mdp.gamma), Error);
}

TEST_CASE("synthesize_value_matched_kernel on swamp5") {
    const FiniteMDP mdp = swamp5();
    const auto truth = value_iteration(mdp);
    const auto rep = synthesize_value_matched_kernel(mdp, truth.V);
    REQUIRE(std::holds_alternative<StochasticModel>(rep.model));
    const Kernel& k = std::get<StochasticModel>(rep.model).kernel;
    CHECK(std::abs(k(0, kRisky, 3) - 10.0 / 11.0) <= 1e-9);
    CHECK(std::abs(k(0, kRisky, 4) - 1.0 / 11.0) <= 1e-9);
    CHECK(k(0, kSafe, 0) == 1.0);
    CHECK(rep.verified);
    CHECK(rep.witnesses.empty());
    for (double e : rep.matching_error.data()) CHECK(e <= 1e-12);
}

TEST_CASE("synthesize_value_matched_kernel reproduces deterministic truth") {
    const FiniteMDP mdp = builtin_scenario("perfect2").mdp();
    const auto truth = value_iteration(mdp);
    REQUIRE(truth.V[0] != truth.V[1]);
    const auto rep = synthesize_value_matched_kernel(mdp, truth.V);
    CHECK(std::get<StochasticModel>(rep.model).kernel == mdp.kernel);
}

TEST_CASE("synthesize_value_matched_deterministic") {
    const FiniteMDP mdp = swamp5();
    const auto truth = value_iteration(mdp);
    const auto rep = synthesize_value_matched_deterministic(mdp, truth.V);
    const auto& f = std::get<DeterministicModel>(rep.model);
    CHECK(f(0, kRisky) == 3);
    CHECK(std::abs(rep.matching_error(0, kRisky) - 1.0 / 11.0) <= 1e-9);
    CHECK_FALSE(rep.verified);
    REQUIRE(rep.witnesses.size() == 1);
    CHECK(rep.witnesses[0].state == 2);
    CHECK(rep.witnesses[0].action == kSafe);
    CHECK(rep.witnesses[0].model_advantage == 0.0);
    CHECK(std::abs(rep.witnesses[0].true_advantage - 0.9 / 11.0) <= 1e-9);

    const FiniteMDP det = builtin_scenario("perfect2").mdp();
    const auto drep = synthesize_value_matched_deterministic(det, value_iteration(det).V);
    CHECK(drep.verified);
    CHECK(as_dirac_kernel(std::get<DeterministicModel>(drep.model)).kernel == det.kernel);
}

TEST_CASE("synthesis rejects unbounded targets") {
    FiniteMDP mdp = swamp5();
    std::vector<double> V = value_iteration(mdp).V;
    V[4] = kInf;
    try {
        synthesize_value_matched_kernel(mdp, V);
        FAIL("expected UnboundedTarget");
    } catch (const Error& e) {
        CHECK(e.kind() == "UnboundedTarget");
    }
}

TEST_CASE("property: synthesis exactness and optimality") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const FiniteMDP mdp = random_mdp(rng, {25, 4, 0.95, 0.0});
        const auto truth = value_iteration(mdp);
        const auto rep = synthesize_value_matched_kernel(mdp, truth.V);
        const Kernel& k = std::get<StochasticModel>(rep.model).kernel;
        for (std::size_t s = 0; s < mdp.n_states(); ++s) {
            for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
                const double t = expected_under(mdp.kernel, s, a, truth.V);
                CHECK(std::abs(expected_under(k, s, a, truth.V) - t) <= 1e-10);
            }
        }
        const auto hat = solve_model_mdp({k}, mdp.stage_cost, mdp.gamma);
        CHECK(max_abs_diff(hat.Q, truth.Q) <= 1e-8);
        CHECK(hat.policy.sets == truth.policy.sets);
        CHECK(rep.verified);
    }
}

TEST_CASE("check_assumption_omega") {
    const FiniteMDP mdp = swamp5();
    const auto truth = value_iteration(mdp);
    const std::vector<std::size_t> all{0, 1, 2, 3, 4};
    CHECK(check_assumption_omega({mdp.kernel}, truth.V, truth.policy.canonical, 5) == all);

    const auto model = as_dirac_kernel(expectation_fit(mdp));
    const auto hat = solve_model_mdp(model, mdp.stage_cost, mdp.gamma);
    CHECK(check_assumption_omega(model, hat.V, truth.policy.canonical, 10) == all);

    // the model sends state 1 under pi* (risky) to state 2, whose value is infinite
    std::vector<double> V_hat{0.0, 0.0, kInf, 0.0, 0.0};
    const auto omega1 = check_assumption_omega(model, V_hat, truth.policy.canonical, 2);
    CHECK(omega1 == std::vector<std::size_t>{3, 4});
    const auto omega0 = check_assumption_omega(model, V_hat, truth.policy.canonical, 1);
    CHECK(omega0 == std::vector<std::size_t>{0, 1, 3, 4});
    CHECK(check_assumption_omega(model, std::vector<double>(5, kInf), truth.policy.canonical, 3).empty());
}
