#include "optcert/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json_io.hpp"

namespace optcert {

using nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
    if (!std::filesystem::exists(path)) throw Error("FileNotFound", path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("FileNotFound", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const ordered_json& field(const ordered_json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error("ParseError", std::string("missing field '") + key + "'");
    return j.at(key);
}

double as_number(const ordered_json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string() && j.get<std::string>() == "inf") return kInf;
    throw Error("ParseError", "field '" + where + "': expected a number or \"inf\"");
}

std::vector<double> as_vector(const ordered_json& j, const std::string& where) {
    if (!j.is_array()) throw Error("ParseError", "field '" + where + "': expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<bool> as_bools(const ordered_json& j, const std::string& where) {
    if (!j.is_array()) throw Error("ParseError", "field '" + where + "': expected an array");
    std::vector<bool> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_boolean()) throw Error("ParseError", "field '" + where + "[" + std::to_string(i) + "]': expected a boolean");
        out.push_back(j[i].get<bool>());
    }
    return out;
}

std::string as_string(const ordered_json& j, const std::string& where) {
    if (!j.is_string()) throw Error("ParseError", "field '" + where + "': expected a string");
    return j.get<std::string>();
}

Kernel kernel_from_json(const ordered_json& j, std::size_t n, std::size_t m, const std::string& where) {
    if (!j.is_array() || j.size() != n) throw Error("ParseError", "field '" + where + "': expected " + std::to_string(n) + " state rows");
    Kernel k(n, m);
    for (std::size_t s = 0; s < n; ++s) {
        if (!j[s].is_array() || j[s].size() != m) {
            throw Error("ParseError", "field '" + where + "[" + std::to_string(s) + "]': expected " + std::to_string(m) + " action rows");
        }
        for (std::size_t a = 0; a < m; ++a) {
            const std::string w = where + "[" + std::to_string(s) + "][" + std::to_string(a) + "]";
            auto row = as_vector(j[s][a], w);
            if (row.size() != n) throw Error("ParseError", "field '" + w + "': expected " + std::to_string(n) + " probabilities");
            std::ranges::copy(row, k.row(s, a).begin());
        }
    }
    return k;
}

Table table_from_json(const ordered_json& j, std::size_t n, std::size_t m, const std::string& where) {
    if (!j.is_array() || j.size() != n) throw Error("ParseError", "field '" + where + "': expected " + std::to_string(n) + " rows");
    Table t(n, m);
    for (std::size_t s = 0; s < n; ++s) {
        auto row = as_vector(j[s], where + "[" + std::to_string(s) + "]");
        if (row.size() != m) throw Error("ParseError", "field '" + where + "[" + std::to_string(s) + "]': expected " + std::to_string(m) + " entries");
        std::ranges::copy(row, t.row(s).begin());
    }
    return t;
}

void validate_or_throw(const Scenario& sc) {
    ValidationResult v = validate_mdp(sc.mdp());
    std::set<std::string> seen;
    for (const auto& l : sc.state_labels) {
        if (!seen.insert(l).second) v.violations.push_back({"DuplicateLabel", "state " + l});
    }
    seen.clear();
    for (const auto& l : sc.action_labels) {
        if (!seen.insert(l).second) v.violations.push_back({"DuplicateLabel", "action " + l});
    }
    if (sc.mpc) {
        const std::size_t n = sc.state_labels.size();
        if (sc.mpc->horizon < 1) v.violations.push_back({"InvalidHorizon", "mpc.horizon"});
        if (!sc.mpc->terminal_cost.empty() && sc.mpc->terminal_cost.size() != n) v.violations.push_back({"ShapeMismatch", "mpc.terminal_cost"});
        if (!sc.mpc->terminal_set.empty() && sc.mpc->terminal_set.size() != n) v.violations.push_back({"ShapeMismatch", "mpc.terminal_set"});
    }
    if (!v.ok()) {
        std::ostringstream os;
        for (std::size_t i = 0; i < v.violations.size(); ++i) {
            os << (i ? "; " : "") << v.violations[i].rule << "(" << v.violations[i].where << ")";
        }
        throw Error("ValidationError", os.str());
    }
}

}  // namespace

FiniteMDP Scenario::mdp() const {
    FiniteMDP out;
    out.kernel = kernel;
    out.stage_cost = constraint_mask ? apply_constraints(stage_cost, *constraint_mask) : stage_cost;
    out.gamma = gamma;
    out.embeddings = embeddings;
    out.initial_distribution = initial_distribution;
    return out;
}

Scenario scenario_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
        throw Error("ParseError", "line " + std::to_string(line) + ": " + e.what());
    }

    Scenario sc;
    sc.name = as_string(field(j, "name"), "name");
    const auto& states = field(j, "states");
    if (!states.is_array() || states.empty()) throw Error("ParseError", "field 'states': expected a non-empty array");
    bool any_embedding = false;
    for (std::size_t s = 0; s < states.size(); ++s) {
        const std::string w = "states[" + std::to_string(s) + "]";
        sc.state_labels.push_back(as_string(field(states[s], "label"), w + ".label"));
        if (states[s].contains("embedding")) {
            any_embedding = true;
            sc.embeddings.push_back(as_vector(states[s]["embedding"], w + ".embedding"));
        } else {
            sc.embeddings.emplace_back();
        }
    }
    if (!any_embedding) sc.embeddings.clear();

    const auto& actions = field(j, "actions");
    if (!actions.is_array() || actions.empty()) throw Error("ParseError", "field 'actions': expected a non-empty array");
    for (std::size_t a = 0; a < actions.size(); ++a) sc.action_labels.push_back(as_string(actions[a], "actions[" + std::to_string(a) + "]"));

    const std::size_t n = sc.state_labels.size();
    const std::size_t m = sc.action_labels.size();
    sc.kernel = kernel_from_json(field(j, "kernel"), n, m, "kernel");
    sc.stage_cost = table_from_json(field(j, "stage_cost"), n, m, "stage_cost");
    sc.gamma = as_number(field(j, "gamma"), "gamma");
    sc.initial_distribution = as_vector(field(j, "initial_distribution"), "initial_distribution");

    if (j.contains("constraint_mask")) {
        const auto& cm = j["constraint_mask"];
        if (!cm.is_array() || cm.size() != n) throw Error("ParseError", "field 'constraint_mask': expected " + std::to_string(n) + " rows");
        Mask mask;
        for (std::size_t s = 0; s < n; ++s) {
            mask.push_back(as_bools(cm[s], "constraint_mask[" + std::to_string(s) + "]"));
            if (mask.back().size() != m) throw Error("ParseError", "field 'constraint_mask[" + std::to_string(s) + "]': expected " + std::to_string(m) + " entries");
        }
        sc.constraint_mask = std::move(mask);
    }
    if (j.contains("mpc")) {
        const auto& mj = j["mpc"];
        MPCBlock block;
        const auto& h = field(mj, "horizon");
        if (!h.is_number_integer()) throw Error("ParseError", "field 'mpc.horizon': expected an integer");
        block.horizon = h.get<std::size_t>();
        if (mj.contains("terminal_cost")) block.terminal_cost = as_vector(mj["terminal_cost"], "mpc.terminal_cost");
        if (mj.contains("terminal_set")) block.terminal_set = as_bools(mj["terminal_set"], "mpc.terminal_set");
        sc.mpc = std::move(block);
    }
    validate_or_throw(sc);
    return sc;
}

std::string scenario_to_json_text(const Scenario& sc) {
    ordered_json j;
    j["name"] = sc.name;
    j["gamma"] = json_io::number(sc.gamma);
    ordered_json states = ordered_json::array();
    for (std::size_t s = 0; s < sc.state_labels.size(); ++s) {
        ordered_json st;
        st["label"] = sc.state_labels[s];
        if (!sc.embeddings.empty()) st["embedding"] = json_io::numbers(sc.embeddings[s]);
        states.push_back(std::move(st));
    }
    j["states"] = std::move(states);
    j["actions"] = sc.action_labels;
    j["kernel"] = json_io::kernel(sc.kernel);
    j["stage_cost"] = json_io::table(sc.stage_cost);
    j["initial_distribution"] = json_io::numbers(sc.initial_distribution);
    if (sc.constraint_mask) j["constraint_mask"] = *sc.constraint_mask;
    if (sc.mpc) {
        ordered_json mj;
        mj["horizon"] = sc.mpc->horizon;
        if (!sc.mpc->terminal_cost.empty()) mj["terminal_cost"] = json_io::numbers(sc.mpc->terminal_cost);
        if (!sc.mpc->terminal_set.empty()) mj["terminal_set"] = sc.mpc->terminal_set;
        j["mpc"] = std::move(mj);
    }
    return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return scenario_from_json_text(text);
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + (e.what() + e.kind().size() + 2));
    }
}

void save_scenario(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("IOError", "cannot write " + path);
    out << scenario_to_json_text(scenario);
}

PredictiveModel load_model(const std::string& path, std::size_t n, std::size_t m) {
    const std::string text = read_file(path);
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw Error("ParseError", path + ": " + e.what());
    }
    if (j.contains("model") && !j.contains("kind")) j = j["model"];
    const std::string kind = as_string(field(j, "kind"), "kind");
    if (kind == "deterministic") {
        const auto& succ = field(j, "successor");
        if (!succ.is_array() || succ.size() != n) throw Error("ParseError", "field 'successor': expected " + std::to_string(n) + " rows");
        DeterministicModel f(n, m);
        for (std::size_t s = 0; s < n; ++s) {
            if (!succ[s].is_array() || succ[s].size() != m) throw Error("ParseError", "field 'successor[" + std::to_string(s) + "]'");
            for (std::size_t a = 0; a < m; ++a) {
                if (!succ[s][a].is_number_unsigned()) throw Error("ParseError", "field 'successor': expected state indices");
                f(s, a) = succ[s][a].get<std::size_t>();
            }
        }
        as_dirac_kernel(f);  // range check
        return f;
    }
    if (kind == "stochastic") return StochasticModel{kernel_from_json(field(j, "kernel"), n, m, "kernel")};
    throw Error("ParseError", "field 'kind': expected \"deterministic\" or \"stochastic\"");
}

std::string model_to_json_text(const PredictiveModel& model) {
    return json_io::model(model).dump(2) + "\n";
}

}  // namespace optcert
