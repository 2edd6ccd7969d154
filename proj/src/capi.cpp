#include "optcert/optcert.h"

#include <new>
#include <sstream>
#include <string>

#include "optcert/report.hpp"

struct optcert_scenario {
    optcert::Scenario value;
};

struct optcert_report {
    optcert::Report value;
};

namespace {

thread_local std::string last_error;

optcert_status status_for(const std::string& kind) {
    if (kind == "UsageError" || kind == "IndexOutOfRange") return OPTCERT_USAGE;
    if (kind == "FileNotFound") return OPTCERT_NOT_FOUND;
    if (kind == "NonConvergence") return OPTCERT_NONCONVERGENCE;
    if (kind == "InternalInconsistency" || kind == "EnvelopeInvariant") return OPTCERT_INTERNAL;
    return OPTCERT_VALIDATION;
}

template <class F>
optcert_status guarded(F&& body) {
    last_error.clear();
    try {
        return body();
    } catch (const optcert::Error& e) {
        last_error = e.what();
        return status_for(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return OPTCERT_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return OPTCERT_INTERNAL;
    }
}

optcert_status usage(const char* message) {
    last_error = message;
    return OPTCERT_USAGE;
}

optcert::SolveOptions solve_options(const optcert_options* o) {
    optcert::SolveOptions s;
    if (o == nullptr) return s;
    if (o->tol > 0.0) s.tol = o->tol;
    if (o->argmin_tol > 0.0) s.argmin_tol = o->argmin_tol;
    if (o->max_iter > 0) s.max_iter = o->max_iter;
    return s;
}

optcert::CertifyOptions certify_options(const optcert_options* o) {
    optcert::CertifyOptions c;
    c.solve = solve_options(o);
    if (o != nullptr) c.horizon = o->omega_horizon;
    return c;
}

optcert_status finish(optcert::Report report, optcert_report** out) {
    const bool negative = report.negative;
    *out = new optcert_report{std::move(report)};
    return negative ? OPTCERT_NEGATIVE_VERDICT : OPTCERT_OK;
}

}  // namespace

extern "C" {

const char* optcert_last_error(void) { return last_error.c_str(); }

const char* optcert_version(void) { return "0.1.0"; }

optcert_status optcert_scenario_load(const char* path, optcert_scenario** out) {
    if (path == nullptr || out == nullptr) return usage("null argument");
    return guarded([&] {
        *out = new optcert_scenario{optcert::load_scenario(path)};
        return OPTCERT_OK;
    });
}

optcert_status optcert_scenario_builtin(const char* name, optcert_scenario** out) {
    if (name == nullptr || out == nullptr) return usage("null argument");
    return guarded([&] {
        *out = new optcert_scenario{optcert::builtin_scenario(name)};
        return OPTCERT_OK;
    });
}

optcert_status optcert_scenario_save(const optcert_scenario* scenario, const char* path) {
    if (scenario == nullptr || path == nullptr) return usage("null argument");
    return guarded([&] {
        optcert::save_scenario(scenario->value, path);
        return OPTCERT_OK;
    });
}

const char* optcert_builtin_names(void) {
    static const std::string names = [] {
        std::string joined;
        for (const auto& n : optcert::builtin_names()) joined += n + "\n";
        return joined;
    }();
    return names.c_str();
}

void optcert_scenario_free(optcert_scenario* scenario) { delete scenario; }

optcert_status optcert_solve(const optcert_scenario* s, const optcert_options* options, optcert_report** out) {
    if (s == nullptr || out == nullptr) return usage("null argument");
    return guarded([&] { return finish(optcert::solve_report(s->value, solve_options(options)), out); });
}

optcert_status optcert_certify(const optcert_scenario* s, const char* model, const optcert_options* options,
                               optcert_report** out) {
    if (s == nullptr || model == nullptr || out == nullptr) return usage("null argument");
    return guarded([&] {
        return finish(optcert::certify_report(s->value, optcert::ModelSpec::parse(model), certify_options(options)), out);
    });
}

optcert_status optcert_suffcheck(const optcert_scenario* s, const char* model, const optcert_options* options,
                                 optcert_report** out) {
    if (s == nullptr || model == nullptr || out == nullptr) return usage("null argument");
    return guarded([&] {
        return finish(optcert::suffcheck_report(s->value, optcert::ModelSpec::parse(model), solve_options(options)), out);
    });
}

optcert_status optcert_synthesize(const optcert_scenario* s, int deterministic, const optcert_options* options,
                                  optcert_report** out) {
    if (s == nullptr || out == nullptr) return usage("null argument");
    return guarded([&] {
        return finish(optcert::synthesize_report(s->value, deterministic != 0, solve_options(options)), out);
    });
}

optcert_status optcert_mpc(const optcert_scenario* s, const char* model, size_t horizon, const char* terminal,
                           const optcert_options* options, optcert_report** out) {
    if (s == nullptr || model == nullptr || out == nullptr) return usage("null argument");
    return guarded([&] {
        return finish(optcert::mpc_report(s->value, optcert::ModelSpec::parse(model), horizon,
                                          terminal != nullptr ? terminal : "scenario", solve_options(options)),
                      out);
    });
}

optcert_status optcert_simulate(const optcert_scenario* s, const char* policy, size_t episodes, uint64_t seed,
                                size_t truncation, const optcert_options* options, optcert_report** out) {
    if (s == nullptr || policy == nullptr || out == nullptr) return usage("null argument");
    if (episodes == 0) return usage("episodes must be positive");
    return guarded([&] {
        return finish(optcert::simulate_report(s->value, policy, episodes, seed, truncation, solve_options(options)), out);
    });
}

optcert_status optcert_compare(const optcert_scenario* s, const char* models, const optcert_options* options,
                               optcert_report** out) {
    if (s == nullptr || out == nullptr) return usage("null argument");
    return guarded([&] {
        std::vector<optcert::ModelSpec> specs;
        if (models == nullptr || *models == '\0') {
            specs = optcert::baseline_specs();
        } else {
            std::stringstream ss(models);
            std::string token;
            while (std::getline(ss, token, ',')) {
                if (!token.empty()) specs.push_back(optcert::ModelSpec::parse(token));
            }
        }
        return finish(optcert::compare_report(s->value, specs, certify_options(options)), out);
    });
}

const char* optcert_report_json(const optcert_report* report) { return report ? report->value.json.c_str() : ""; }

const char* optcert_report_table(const optcert_report* report) { return report ? report->value.table.c_str() : ""; }

int optcert_report_negative(const optcert_report* report) { return report && report->value.negative ? 1 : 0; }

void optcert_report_free(optcert_report* report) { delete report; }

}  // extern "C"
