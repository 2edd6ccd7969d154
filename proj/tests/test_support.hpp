// Shared fixtures for the test executables: seeded random MDPs and a brute-force
// policy-enumeration oracle with its own Gaussian elimination.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "optcert/certificates.hpp"
#include "optcert/mdp.hpp"
#include "optcert/models.hpp"

namespace testing {

using namespace optcert;

inline constexpr std::size_t kSafe = 0;
inline constexpr std::size_t kRisky = 1;

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Sparse random kernel: each row puts mass on 1..`support` distinct successors.
inline Kernel random_kernel(std::mt19937_64& rng, std::size_t n, std::size_t m, std::size_t support = 3) {
    Kernel k(n, m);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < m; ++a) {
            const std::size_t count = 1 + pick(rng, std::min(support, n));
            double total = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                const double w = uniform(rng, 0.1, 1.0);
                k(s, a, pick(rng, n)) += w;
                total += w;
            }
            for (double& p : k.row(s, a)) p /= total;
        }
    }
    return k;
}

struct RandomMDPOptions {
    std::size_t max_states = 50;
    std::size_t max_actions = 5;
    double max_gamma = 0.95;
    // Probability that a pair is masked to +inf (at least one action per state stays finite).
    double inf_probability = 0.0;
};

inline FiniteMDP random_mdp(std::mt19937_64& rng, const RandomMDPOptions& o = {}) {
    const std::size_t n = 1 + pick(rng, o.max_states);
    const std::size_t m = 1 + pick(rng, o.max_actions);
    FiniteMDP mdp;
    mdp.kernel = random_kernel(rng, n, m);
    mdp.gamma = uniform(rng, 0.3, o.max_gamma);
    mdp.stage_cost = Table(n, m);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t keep = pick(rng, m);
        for (std::size_t a = 0; a < m; ++a) {
            mdp.stage_cost(s, a) = uniform(rng, 0.0, 5.0);
            if (a != keep && uniform(rng) < o.inf_probability) mdp.stage_cost(s, a) = kInf;
        }
    }
    mdp.embeddings.assign(n, {});
    for (std::size_t s = 0; s < n; ++s) mdp.embeddings[s] = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
    mdp.initial_distribution.assign(n, 1.0 / static_cast<double>(n));
    return mdp;
}

// Mixes the true kernel with a random one: weight 0 reproduces the truth.
inline StochasticModel perturbed_model(std::mt19937_64& rng, const FiniteMDP& mdp, double weight) {
    Kernel noise = random_kernel(rng, mdp.n_states(), mdp.n_actions());
    Kernel k = mdp.kernel;
    for (std::size_t s = 0; s < mdp.n_states(); ++s) {
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            for (std::size_t x = 0; x < mdp.n_states(); ++x) {
                k(s, a, x) = (1.0 - weight) * mdp.kernel(s, a, x) + weight * noise(s, a, x);
            }
        }
    }
    return {k};
}

// Solves (I - gamma P) v = c by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        }
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = A[r][c] / A[c][c];
            for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t k = i + 1; k < n; ++k) acc -= A[i][k] * x[k];
        x[i] = acc / A[i][i];
    }
    return x;
}

// Value of a deterministic policy with finite costs everywhere.
inline std::vector<double> oracle_policy_value(const FiniteMDP& mdp, const std::vector<std::size_t>& pi) {
    const std::size_t n = mdp.n_states();
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n);
    for (std::size_t s = 0; s < n; ++s) {
        A[s][s] = 1.0;
        for (std::size_t x = 0; x < n; ++x) A[s][x] -= mdp.gamma * mdp.kernel(s, pi[s], x);
        b[s] = mdp.stage_cost(s, pi[s]);
    }
    return gauss_solve(A, b);
}

// V* as the pointwise minimum over all m^n deterministic policies (finite costs only).
inline std::vector<double> brute_force_optimal(const FiniteMDP& mdp) {
    const std::size_t n = mdp.n_states();
    const std::size_t m = mdp.n_actions();
    std::vector<std::size_t> pi(n, 0);
    std::vector<double> best(n, kInf);
    while (true) {
        const auto v = oracle_policy_value(mdp, pi);
        for (std::size_t s = 0; s < n; ++s) best[s] = std::min(best[s], v[s]);
        std::size_t i = 0;
        while (i < n && ++pi[i] == m) pi[i++] = 0;
        if (i == n) break;
    }
    return best;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, extended_distance(a[i], b[i]));
    return d;
}

inline double max_abs_diff(const Table& a, const Table& b) { return max_abs_diff(a.data(), b.data()); }

}  // namespace testing
