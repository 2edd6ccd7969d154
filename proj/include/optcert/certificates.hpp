// Optimality certificates for model-based policies.
//
// Given the true MDP and a candidate model, the model-based greedy policy is
// optimal iff the tolerance-argmin sets of the two advantage functions agree.
// With finitely many pairs that equivalence is witnessed constructively by a
// lower envelope alpha and an upper envelope beta that sandwich the model
// advantage as a function of the true advantage. The value shift lambda and
// the induced gap function Lambda relate the two Bellman systems without
// touching either policy.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "optcert/mdp.hpp"
#include "optcert/models.hpp"

namespace optcert {

/// State-dependent value offset. Outside `domain` the entry is 0 and carries no meaning.
struct LambdaShift {
    std::vector<double> values;
    std::vector<bool> domain;

    static LambdaShift everywhere(std::vector<double> values);
};

struct ShiftedPair {
    LambdaShift lambda;
    ValueFunction V_hat_lambda;
    Table Q_hat_lambda;
};

struct KFunctionEnvelope {
    enum class Kind { Lower, Upper };

    Kind kind = Kind::Lower;
    /// (x, y) with x strictly increasing over attained true advantages, first point (0, 0).
    std::vector<std::pair<double, double>> breakpoints;
    double extension_slope = 1.0;

    double operator()(double x) const;
};

struct ZeroSetViolation {
    std::vector<PairWitness> witnesses;
};

using EnvelopeResult = std::variant<KFunctionEnvelope, ZeroSetViolation>;

enum class Verdict { Certified, Refuted, Inapplicable };

const char* to_string(Verdict v);

struct CertifyOptions {
    SolveOptions solve;
    /// Horizon for the Omega reachability check; 0 selects n_states.
    std::size_t horizon = 0;
    /// Slack allowed when verifying the sandwich inequalities.
    double sandwich_slack = 1e-9;
};

struct CertificateReport {
    Verdict verdict = Verdict::Inapplicable;
    LambdaShift lambda;
    Table Lambda;
    std::optional<KFunctionEnvelope> alpha;
    std::optional<KFunctionEnvelope> beta;
    std::vector<PairWitness> witnesses;
    std::vector<std::size_t> omega;

    SolveReport true_solution;
    SolveReport model_solution;
    Table true_advantage;
    Table model_advantage;
    double modified_bellman_residual = 0.0;
    /// Smallest of beta(A*) - A-hat and A-hat - alpha(A*) over finite pairs.
    double sandwich_slack = 0.0;
    /// Independent tolerance-argmin comparison; always equals verdict == Certified.
    bool argmin_sets_equal = false;
    std::string note;
};

/// lambda = V* - V-hat on the states where both are finite.
/// Throws Error("EmptyCommonDomain") when no such state exists.
ShiftedPair lambda_value_matching(std::span<const double> V_star, std::span<const double> V_hat,
                                  const Table& Q_hat);

/// Adds an arbitrary bounded shift to a model solution.
ShiftedPair apply_shift(const LambdaShift& lambda, std::span<const double> V_hat, const Table& Q_hat);

/// Lambda(s,a) = lambda(s) - gamma * E[lambda(s+) | s,a] under `kernel`.
/// With `strict`, a support state outside the lambda domain throws
/// Error("InfiniteLambdaOnSupport"); otherwise that entry becomes +inf.
Table gap_function(const LambdaShift& lambda, const Kernel& kernel, double gamma, bool strict = true);

/// sup over finite pairs of |Q_lambda - L - Lambda - gamma E_model[V_lambda]|.
double modified_bellman_residual(const Kernel& model_kernel, const Table& stage_cost, double gamma,
                                 const Table& Lambda, std::span<const double> V_hat_lambda,
                                 const Table& Q_hat_lambda);

/// Model advantage; identical for the shifted and unshifted pair.
Table shifted_advantage(const Table& Q_hat, std::span<const double> V_hat, double tol = 1e-9);

/// Lower envelope min{A-hat : A* >= x}, or the pairs with A-hat = 0 < A*.
EnvelopeResult construct_alpha(const Table& A_star, const Table& A_hat, double tol = 1e-9);

/// Upper envelope max{A-hat : A* <= x}, or the pairs with A* = 0 < A-hat.
EnvelopeResult construct_beta(const Table& A_star, const Table& A_hat, double tol = 1e-9);

/// Full pipeline: solve both MDPs, compute Omega, shift, build envelopes,
/// verify the sandwich and cross-check against direct argmin comparison.
CertificateReport certify_argmin_equivalence(const FiniteMDP& mdp, const StochasticModel& model,
                                             const CertifyOptions& options = {});

struct DeltaCheck {
    bool constant = false;
    double delta = 0.0;
    double spread = 0.0;
    /// D(s,a) = E_true[V*] - E_model[V*]; +inf where undefined.
    Table D;
    std::pair<std::size_t, std::size_t> min_pair{0, 0};
    std::pair<std::size_t, std::size_t> max_pair{0, 0};
};

/// Constant-offset sufficient condition. `constant` is false when the spread exceeds `tol`.
DeltaCheck check_sufficient_delta(const FiniteMDP& mdp, const StochasticModel& model,
                                  std::span<const double> V_star, double tol = 1e-9);

}  // namespace optcert
