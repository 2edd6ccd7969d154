// JSON encoding helpers shared by scenario files and reports (+inf as "inf").
#pragma once

#include <json.hpp>

#include <span>
#include <variant>

#include "optcert/models.hpp"
#include "optcert/tables.hpp"

namespace optcert::json_io {

using nlohmann::ordered_json;

inline ordered_json number(double x) {
    if (is_inf(x)) return "inf";
    return x;
}

inline ordered_json numbers(std::span<const double> xs) {
    ordered_json out = ordered_json::array();
    for (double x : xs) out.push_back(number(x));
    return out;
}

inline ordered_json table(const Table& t) {
    ordered_json out = ordered_json::array();
    for (std::size_t r = 0; r < t.rows(); ++r) out.push_back(numbers(t.row(r)));
    return out;
}

inline ordered_json kernel(const Kernel& k) {
    ordered_json out = ordered_json::array();
    for (std::size_t s = 0; s < k.n_states(); ++s) {
        ordered_json per_action = ordered_json::array();
        for (std::size_t a = 0; a < k.n_actions(); ++a) per_action.push_back(numbers(k.row(s, a)));
        out.push_back(std::move(per_action));
    }
    return out;
}

inline ordered_json model(const PredictiveModel& m) {
    ordered_json j;
    if (const auto* det = std::get_if<DeterministicModel>(&m)) {
        j["kind"] = "deterministic";
        ordered_json succ = ordered_json::array();
        for (std::size_t s = 0; s < det->n_states(); ++s) {
            ordered_json row = ordered_json::array();
            for (std::size_t a = 0; a < det->n_actions(); ++a) row.push_back((*det)(s, a));
            succ.push_back(std::move(row));
        }
        j["successor"] = std::move(succ);
    } else {
        j["kind"] = "stochastic";
        j["kernel"] = kernel(std::get<StochasticModel>(m).kernel);
    }
    return j;
}

}  // namespace optcert::json_io
