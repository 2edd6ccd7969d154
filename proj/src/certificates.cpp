#include "optcert/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace optcert {

namespace {

struct Point {
    double x;
    double y;
};

// Advantages within the argmin tolerance are exactly zero for every envelope test.
double snap(double a, double tol) { return a <= tol ? 0.0 : a; }

bool row_comparable(const Table& A, std::size_t s) {
    return std::ranges::any_of(A.row(s), [](double x) { return !is_inf(x); });
}

std::vector<Point> finite_points(const Table& A_star, const Table& A_hat, double tol) {
    std::vector<Point> pts;
    for (std::size_t s = 0; s < A_star.rows(); ++s) {
        for (std::size_t a = 0; a < A_star.cols(); ++a) {
            if (is_inf(A_star(s, a)) || is_inf(A_hat(s, a))) continue;
            pts.push_back({snap(A_star(s, a), tol), snap(A_hat(s, a), tol)});
        }
    }
    std::ranges::sort(pts, [](const Point& l, const Point& r) { return l.x < r.x; });
    return pts;
}

// Groups sorted points by distinct x, giving (x, min y) and (x, max y) per group.
struct Group {
    double x;
    double y_min;
    double y_max;
};

std::vector<Group> group_by_x(const std::vector<Point>& pts) {
    std::vector<Group> groups;
    for (const auto& p : pts) {
        if (groups.empty() || groups.back().x != p.x) groups.push_back({p.x, p.y, p.y});
        else {
            groups.back().y_min = std::min(groups.back().y_min, p.y);
            groups.back().y_max = std::max(groups.back().y_max, p.y);
        }
    }
    return groups;
}

void check_shapes(const Table& A_star, const Table& A_hat) {
    if (A_star.rows() != A_hat.rows() || A_star.cols() != A_hat.cols()) {
        throw Error("ShapeMismatch", "advantage tables differ in shape");
    }
}

enum class ZeroSide { ModelOnly, TrueOnly };

std::vector<PairWitness> zero_set_witnesses(const Table& A_star, const Table& A_hat, double tol,
                                            ZeroSide side) {
    std::vector<PairWitness> out;
    for (std::size_t s = 0; s < A_star.rows(); ++s) {
        if (!row_comparable(A_star, s) || !row_comparable(A_hat, s)) continue;
        for (std::size_t a = 0; a < A_star.cols(); ++a) {
            const bool zero_star = A_star(s, a) <= tol;
            const bool zero_hat = A_hat(s, a) <= tol;
            const bool hit = side == ZeroSide::ModelOnly ? (zero_hat && !zero_star) : (zero_star && !zero_hat);
            if (!hit) continue;
            PairWitness w;
            w.state = s;
            w.action = a;
            w.reason = side == ZeroSide::ModelOnly ? "zero-set: model advantage 0, true advantage > 0"
                                                   : "zero-set: true advantage 0, model advantage > 0";
            w.true_advantage = A_star(s, a);
            w.model_advantage = A_hat(s, a);
            out.push_back(std::move(w));
        }
    }
    return out;
}

void require(bool cond, const char* what) {
    if (!cond) throw Error("EnvelopeInvariant", what);
}

}  // namespace

LambdaShift LambdaShift::everywhere(std::vector<double> values) {
    LambdaShift out;
    out.domain.assign(values.size(), true);
    out.values = std::move(values);
    return out;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Certified: return "certified";
        case Verdict::Refuted: return "refuted";
        case Verdict::Inapplicable: return "inapplicable";
    }
    return "?";
}

double KFunctionEnvelope::operator()(double x) const {
    if (breakpoints.empty() || x <= 0.0) return 0.0;
    if (is_inf(x)) return kInf;
    const auto& last = breakpoints.back();
    if (x > last.first) return last.second + extension_slope * (x - last.first);
    if (kind == Kind::Lower) {
        // smallest attained x_i >= x
        const auto it = std::ranges::lower_bound(breakpoints, x, {}, &std::pair<double, double>::first);
        return it->second;
    }
    // largest attained x_i <= x
    auto it = std::ranges::upper_bound(breakpoints, x, {}, &std::pair<double, double>::first);
    return std::prev(it)->second;
}

ShiftedPair lambda_value_matching(std::span<const double> V_star, std::span<const double> V_hat,
                                  const Table& Q_hat) {
    const std::size_t n = V_star.size();
    if (V_hat.size() != n || Q_hat.rows() != n) throw Error("ShapeMismatch", "lambda_value_matching");
    LambdaShift lambda;
    lambda.values.assign(n, 0.0);
    lambda.domain.assign(n, false);
    bool any = false;
    for (std::size_t s = 0; s < n; ++s) {
        if (is_inf(V_star[s]) || is_inf(V_hat[s])) continue;
        lambda.values[s] = V_star[s] - V_hat[s];
        lambda.domain[s] = true;
        any = true;
    }
    if (!any) throw Error("EmptyCommonDomain", "V* and V-hat are never simultaneously finite");

    ShiftedPair out = apply_shift(lambda, V_hat, Q_hat);
    // V-hat + lambda reproduces V* up to rounding; store V* itself.
    for (std::size_t s = 0; s < n; ++s) {
        if (lambda.domain[s]) out.V_hat_lambda[s] = V_star[s];
    }
    return out;
}

ShiftedPair apply_shift(const LambdaShift& lambda, std::span<const double> V_hat, const Table& Q_hat) {
    ShiftedPair out{lambda, ValueFunction(V_hat.begin(), V_hat.end()), Q_hat};
    for (std::size_t s = 0; s < V_hat.size(); ++s) {
        if (!lambda.domain[s]) continue;
        const double l = lambda.values[s];
        if (!is_inf(out.V_hat_lambda[s])) out.V_hat_lambda[s] += l;
        for (double& q : out.Q_hat_lambda.row(s)) {
            if (!is_inf(q)) q += l;
        }
    }
    return out;
}

Table gap_function(const LambdaShift& lambda, const Kernel& kernel, double gamma, bool strict) {
    const std::size_t n = kernel.n_states();
    Table Lambda(n, kernel.n_actions());
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < kernel.n_actions(); ++a) {
            const auto row = kernel.row(s, a);
            bool defined = lambda.domain[s];
            double ev = 0.0;
            for (std::size_t t = 0; t < n && defined; ++t) {
                if (row[t] == 0.0) continue;
                if (!lambda.domain[t]) defined = false;
                else ev += row[t] * lambda.values[t];
            }
            if (!defined) {
                if (strict) {
                    std::ostringstream os;
                    os << "lambda undefined on the support of s=" << s << ",a=" << a;
                    throw Error("InfiniteLambdaOnSupport", os.str());
                }
                Lambda(s, a) = kInf;
                continue;
            }
            Lambda(s, a) = lambda.values[s] - gamma * ev;
        }
    }
    return Lambda;
}

double modified_bellman_residual(const Kernel& model_kernel, const Table& stage_cost, double gamma,
                                 const Table& Lambda, std::span<const double> V_hat_lambda,
                                 const Table& Q_hat_lambda) {
    double residual = 0.0;
    for (std::size_t s = 0; s < Q_hat_lambda.rows(); ++s) {
        for (std::size_t a = 0; a < Q_hat_lambda.cols(); ++a) {
            const double q = Q_hat_lambda(s, a);
            const double L = stage_cost(s, a);
            const double ev = expectation(model_kernel.row(s, a), V_hat_lambda);
            if (is_inf(q) || is_inf(L) || is_inf(Lambda(s, a)) || is_inf(ev)) continue;
            residual = std::max(residual, std::abs(q - L - Lambda(s, a) - gamma * ev));
        }
    }
    return residual;
}

Table shifted_advantage(const Table& Q_hat, std::span<const double> V_hat, double tol) {
    return advantage(Q_hat, V_hat, tol);
}

EnvelopeResult construct_alpha(const Table& A_star, const Table& A_hat, double tol) {
    check_shapes(A_star, A_hat);
    auto witnesses = zero_set_witnesses(A_star, A_hat, tol, ZeroSide::ModelOnly);
    if (!witnesses.empty()) return ZeroSetViolation{std::move(witnesses)};

    const auto pts = finite_points(A_star, A_hat, tol);
    const auto groups = group_by_x(pts);
    KFunctionEnvelope env;
    env.kind = KFunctionEnvelope::Kind::Lower;
    env.breakpoints.resize(groups.size());
    double suffix_min = kInf;
    for (std::size_t i = groups.size(); i-- > 0;) {
        suffix_min = std::min(suffix_min, groups[i].y_min);
        env.breakpoints[i] = {groups[i].x, suffix_min};
    }
    if (env.breakpoints.empty() || env.breakpoints.front().first > 0.0) {
        env.breakpoints.insert(env.breakpoints.begin(), {0.0, 0.0});
    }

    require(env.breakpoints.front().second == 0.0, "alpha(0) = 0");
    for (std::size_t i = 1; i < env.breakpoints.size(); ++i) {
        require(env.breakpoints[i].second > 0.0, "alpha(x) > 0 for x > 0");
        require(env.breakpoints[i].second >= env.breakpoints[i - 1].second, "alpha non-decreasing");
    }
    for (const auto& p : pts) require(p.y >= env(p.x), "A-hat >= alpha(A*)");
    return env;
}

EnvelopeResult construct_beta(const Table& A_star, const Table& A_hat, double tol) {
    check_shapes(A_star, A_hat);
    auto witnesses = zero_set_witnesses(A_star, A_hat, tol, ZeroSide::TrueOnly);
    if (!witnesses.empty()) return ZeroSetViolation{std::move(witnesses)};

    const auto pts = finite_points(A_star, A_hat, tol);
    const auto groups = group_by_x(pts);
    KFunctionEnvelope env;
    env.kind = KFunctionEnvelope::Kind::Upper;
    double prefix_max = 0.0;
    for (const auto& g : groups) {
        prefix_max = std::max(prefix_max, g.y_max);
        env.breakpoints.emplace_back(g.x, prefix_max);
    }
    if (env.breakpoints.empty() || env.breakpoints.front().first > 0.0) {
        env.breakpoints.insert(env.breakpoints.begin(), {0.0, 0.0});
    }

    require(env.breakpoints.front().second == 0.0, "beta(0) = 0");
    for (std::size_t i = 1; i < env.breakpoints.size(); ++i) {
        require(env.breakpoints[i].second >= env.breakpoints[i - 1].second, "beta non-decreasing");
    }
    for (const auto& p : pts) require(env(p.x) >= p.y, "beta(A*) >= A-hat");
    return env;
}

CertificateReport certify_argmin_equivalence(const FiniteMDP& mdp, const StochasticModel& model,
                                             const CertifyOptions& options) {
    const double tol = options.solve.argmin_tol;
    const std::size_t n = mdp.n_states();

    CertificateReport rep;
    rep.true_solution = value_iteration(mdp, options.solve);
    rep.model_solution = solve_model_mdp(model, mdp.stage_cost, mdp.gamma, options.solve);
    const auto& V_star = rep.true_solution.V;
    const auto& V_hat = rep.model_solution.V;

    const std::size_t horizon = options.horizon == 0 ? n : options.horizon;
    rep.omega = check_assumption_omega(model, V_hat, rep.true_solution.policy.canonical, horizon);
    if (rep.omega.empty()) {
        rep.verdict = Verdict::Inapplicable;
        rep.note = "no initial state keeps the model value finite (Omega is empty)";
        return rep;
    }

    ShiftedPair shifted;
    try {
        shifted = lambda_value_matching(V_star, V_hat, rep.model_solution.Q);
    } catch (const Error& e) {
        if (e.kind() != "EmptyCommonDomain") throw;
        rep.verdict = Verdict::Inapplicable;
        rep.note = e.what();
        return rep;
    }
    rep.lambda = shifted.lambda;
    rep.Lambda = gap_function(shifted.lambda, model.kernel, mdp.gamma, false);
    rep.modified_bellman_residual = modified_bellman_residual(
        model.kernel, mdp.stage_cost, mdp.gamma, rep.Lambda, shifted.V_hat_lambda, shifted.Q_hat_lambda);

    rep.true_advantage = advantage(rep.true_solution.Q, V_star, tol);
    rep.model_advantage = shifted_advantage(shifted.Q_hat_lambda, shifted.V_hat_lambda, tol);
    // Comparisons only where both value functions are finite.
    for (std::size_t s = 0; s < n; ++s) {
        if (rep.lambda.domain[s]) continue;
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            rep.true_advantage(s, a) = kInf;
            rep.model_advantage(s, a) = kInf;
        }
    }

    auto alpha = construct_alpha(rep.true_advantage, rep.model_advantage, tol);
    auto beta = construct_beta(rep.true_advantage, rep.model_advantage, tol);
    if (auto* v = std::get_if<ZeroSetViolation>(&alpha)) {
        rep.witnesses.insert(rep.witnesses.end(), v->witnesses.begin(), v->witnesses.end());
    } else {
        rep.alpha = std::get<KFunctionEnvelope>(alpha);
    }
    if (auto* v = std::get_if<ZeroSetViolation>(&beta)) {
        rep.witnesses.insert(rep.witnesses.end(), v->witnesses.begin(), v->witnesses.end());
    } else {
        rep.beta = std::get<KFunctionEnvelope>(beta);
    }
    std::ranges::sort(rep.witnesses, [](const PairWitness& l, const PairWitness& r) {
        return std::pair(l.state, l.action) < std::pair(r.state, r.action);
    });

    bool sandwich = rep.alpha.has_value() && rep.beta.has_value();
    if (sandwich) {
        double slack = kInf;
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
                const double x = rep.true_advantage(s, a);
                const double y = rep.model_advantage(s, a);
                if (is_inf(x) || is_inf(y)) continue;
                const double xs = snap(x, tol);
                const double ys = snap(y, tol);
                const double lower = ys - (*rep.alpha)(xs);
                const double upper = (*rep.beta)(xs) - ys;
                slack = std::min({slack, lower, upper});
                if (lower < -options.sandwich_slack || upper < -options.sandwich_slack) {
                    rep.witnesses.push_back({s, a, "sandwich violated", x, y});
                }
            }
        }
        rep.sandwich_slack = is_inf(slack) ? 0.0 : slack;
        sandwich = rep.witnesses.empty();
    }
    rep.verdict = sandwich ? Verdict::Certified : Verdict::Refuted;

    // Independent route: compare tolerance-argmin sets of Q* and Q-hat directly.
    Table q_true = rep.true_solution.Q;
    Table q_model = rep.model_solution.Q;
    for (std::size_t s = 0; s < n; ++s) {
        if (rep.lambda.domain[s]) continue;
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) q_true(s, a) = q_model(s, a) = kInf;
    }
    rep.argmin_sets_equal = argmin_mismatches(q_true, q_model, tol).empty();
    if (rep.argmin_sets_equal != (rep.verdict == Verdict::Certified)) {
        throw Error("InternalInconsistency", "envelope verdict disagrees with direct argmin comparison");
    }
    return rep;
}

DeltaCheck check_sufficient_delta(const FiniteMDP& mdp, const StochasticModel& model,
                                  std::span<const double> V_star, double tol) {
    const std::size_t n = mdp.n_states();
    const std::size_t m = mdp.n_actions();
    DeltaCheck out;
    out.D = Table(n, m, kInf);
    double lo = kInf;
    double hi = -kInf;
    bool undefined_pair = false;
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < m; ++a) {
            if (is_inf(mdp.stage_cost(s, a))) continue;
            const double e_true = expectation(mdp.kernel.row(s, a), V_star);
            const double e_model = expectation(model.kernel.row(s, a), V_star);
            if (is_inf(e_true) && is_inf(e_model)) continue;
            if (is_inf(e_true) || is_inf(e_model)) {
                // one side unbounded: no constant can match
                if (!undefined_pair) out.min_pair = out.max_pair = {s, a};
                undefined_pair = true;
                continue;
            }
            const double d = e_true - e_model;
            out.D(s, a) = d;
            if (d < lo) {
                lo = d;
                if (!undefined_pair) out.min_pair = {s, a};
            }
            if (d > hi) {
                hi = d;
                if (!undefined_pair) out.max_pair = {s, a};
            }
        }
    }
    if (undefined_pair) {
        out.constant = false;
        out.spread = kInf;
        return out;
    }
    if (lo > hi) {  // no finite pair at all
        out.constant = true;
        return out;
    }
    out.spread = hi - lo;
    out.constant = out.spread <= tol;
    out.delta = 0.5 * (lo + hi);
    return out;
}

}  // namespace optcert
