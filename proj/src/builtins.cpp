// Built-in demonstration scenarios, each constructed to exhibit a verdict class.
#include <array>
#include <string>

#include "optcert/scenario.hpp"

namespace optcert {

namespace {

Scenario make_empty(std::string name, std::size_t n, std::vector<std::string> actions) {
    Scenario sc;
    sc.name = std::move(name);
    sc.action_labels = std::move(actions);
    const std::size_t m = sc.action_labels.size();
    sc.kernel = Kernel(n, m);
    sc.stage_cost = Table(n, m, 0.0);
    sc.initial_distribution.assign(n, 1.0 / static_cast<double>(n));
    return sc;
}

// Deterministic two-state system: every data-fit model reproduces it exactly.
Scenario perfect2() {
    Scenario sc = make_empty("perfect2", 2, {"stay", "move"});
    sc.state_labels = {"s0", "s1"};
    sc.embeddings = {{0.0}, {1.0}};
    sc.gamma = 0.9;
    sc.kernel(0, 0, 0) = 1.0;
    sc.stage_cost(0, 0) = 1.0;
    sc.kernel(0, 1, 1) = 1.0;
    sc.stage_cost(0, 1) = 2.0;
    sc.kernel(1, 0, 1) = 1.0;
    sc.stage_cost(1, 0) = 0.0;
    sc.kernel(1, 1, 0) = 1.0;
    sc.stage_cost(1, 1) = 1.0;
    return sc;
}

Scenario risky2() {
    Scenario sc = make_empty("risky2", 2, {"safe", "risky"});
    sc.state_labels = {"s0", "s1"};
    sc.embeddings = {{0.0}, {1.0}};
    sc.gamma = 0.9;
    sc.kernel(0, 0, 0) = 1.0;
    sc.kernel(0, 1, 1) = 0.4;
    sc.kernel(0, 1, 0) = 0.6;
    sc.stage_cost(0, 0) = 1.0;
    sc.stage_cost(0, 1) = 1.0;
    for (std::size_t a = 0; a < 2; ++a) sc.kernel(1, a, 1) = 1.0;
    return sc;
}

// Chain 0..4 with an absorbing free state 4 and an expensive state 2.
Scenario swamp5() {
    constexpr std::size_t n = 5;
    constexpr std::array<double, n> cost{1.0, 1.0, 5.0, 1.0, 0.0};
    Scenario sc = make_empty("swamp5", n, {"safe", "risky"});
    sc.gamma = 0.9;
    for (std::size_t s = 0; s < n; ++s) {
        sc.state_labels.push_back("x" + std::to_string(s));
        sc.embeddings.push_back({static_cast<double>(s)});
        for (std::size_t a = 0; a < 2; ++a) sc.stage_cost(s, a) = cost[s];
        if (s == n - 1) {
            for (std::size_t a = 0; a < 2; ++a) sc.kernel(s, a, s) = 1.0;
            continue;
        }
        sc.kernel(s, 0, s + 1) = 1.0;
        sc.kernel(s, 1, n - 1) = 0.5;
        sc.kernel(s, 1, 0) = 0.5;
    }
    return sc;
}

// 4x4 grid, moves succeed w.p. 0.8 and otherwise stay; column 1 rows 0-2 is
// forbidden, so every move into it (and every action inside it) is masked.
Scenario cliffgrid() {
    constexpr std::size_t side = 4;
    constexpr std::size_t n = side * side;
    constexpr std::size_t goal = 3;  // (0,3)
    Scenario sc = make_empty("cliffgrid", n, {"up", "down", "left", "right"});
    sc.gamma = 0.95;
    auto idx = [](std::size_t r, std::size_t c) { return r * side + c; };
    auto forbidden = [](std::size_t r, std::size_t c) { return c == 1 && r <= 2; };
    constexpr std::array<int, 4> dr{-1, 1, 0, 0};
    constexpr std::array<int, 4> dc{0, 0, -1, 1};

    Mask mask(n, std::vector<bool>(4, false));
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            const std::size_t s = idx(r, c);
            sc.state_labels.push_back("r" + std::to_string(r) + "c" + std::to_string(c));
            sc.embeddings.push_back({static_cast<double>(r), static_cast<double>(c)});
            for (std::size_t a = 0; a < 4; ++a) {
                if (s == goal) {
                    sc.kernel(s, a, s) = 1.0;
                    sc.stage_cost(s, a) = 0.0;
                    continue;
                }
                const int nr = static_cast<int>(r) + dr[a];
                const int nc = static_cast<int>(c) + dc[a];
                const bool inside = nr >= 0 && nc >= 0 && nr < static_cast<int>(side) && nc < static_cast<int>(side);
                const std::size_t t = inside ? idx(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc)) : s;
                sc.kernel(s, a, t) += 0.8;
                sc.kernel(s, a, s) += 0.2;
                sc.stage_cost(s, a) = 1.0;
                const bool into_forbidden = inside && forbidden(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc));
                mask[s][a] = forbidden(r, c) || into_forbidden;
            }
        }
    }
    sc.constraint_mask = std::move(mask);
    sc.initial_distribution.assign(n, 0.0);
    sc.initial_distribution[idx(0, 0)] = 1.0;

    MPCBlock block;
    block.horizon = 10;
    block.terminal_cost.assign(n, 0.0);
    block.terminal_set.assign(n, false);
    block.terminal_set[goal] = true;
    sc.mpc = std::move(block);
    return sc;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"perfect2", "risky2", "swamp5", "cliffgrid"};
    return names;
}

Scenario builtin_scenario(std::string_view name) {
    if (name == "perfect2") return perfect2();
    if (name == "risky2") return risky2();
    if (name == "swamp5") return swamp5();
    if (name == "cliffgrid") return cliffgrid();
    throw Error("UnknownScenario", std::string(name));
}

}  // namespace optcert
