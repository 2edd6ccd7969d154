// Dense tables and extended-real helpers shared by every module.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace optcert {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_inf(double x) { return x == kInf; }

/// Error raised by the core. `kind` is a short machine-readable tag such as
/// "NonConvergence" or "IndexOutOfRange".
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Row-major n x m table of extended reals (finite or +inf).
class Table {
public:
    Table() = default;
    Table(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& data() const { return data_; }

    bool operator==(const Table&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Transition kernel p(s'|s,a) stored as an n x m x n block.
class Kernel {
public:
    Kernel() = default;
    Kernel(std::size_t n_states, std::size_t n_actions)
        : n_(n_states), m_(n_actions), p_(n_states * n_actions * n_states, 0.0) {}

    std::size_t n_states() const { return n_; }
    std::size_t n_actions() const { return m_; }

    double& operator()(std::size_t s, std::size_t a, std::size_t next) {
        return p_[(s * m_ + a) * n_ + next];
    }
    double operator()(std::size_t s, std::size_t a, std::size_t next) const {
        return p_[(s * m_ + a) * n_ + next];
    }

    std::span<const double> row(std::size_t s, std::size_t a) const {
        return {p_.data() + (s * m_ + a) * n_, n_};
    }
    std::span<double> row(std::size_t s, std::size_t a) {
        return {p_.data() + (s * m_ + a) * n_, n_};
    }

    bool operator==(const Kernel&) const = default;

private:
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<double> p_;
};

/// Expectation of `values` under `probs` with 0*inf = 0 and p*inf = inf for p > 0.
inline double expectation(std::span<const double> probs, std::span<const double> values) {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] == 0.0) continue;
        if (is_inf(values[i])) return kInf;
        acc += probs[i] * values[i];
    }
    return acc;
}

/// |a - b| where two infinities compare equal and a single infinity is infinitely far.
inline double extended_distance(double a, double b) {
    if (is_inf(a) && is_inf(b)) return 0.0;
    if (is_inf(a) || is_inf(b)) return kInf;
    return std::abs(a - b);
}

}  // namespace optcert
