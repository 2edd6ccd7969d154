// optcert command-line tool. Links only the C interface.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "optcert/optcert.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;

int exit_code(optcert_status st) {
    switch (st) {
        case OPTCERT_OK: return 0;
        case OPTCERT_NEGATIVE_VERDICT: return 1;
        case OPTCERT_USAGE:
        case OPTCERT_NOT_FOUND: return kExitUsage;
        case OPTCERT_VALIDATION: return kExitValidation;
        default: return 4;
    }
}

struct ScenarioHandle {
    optcert_scenario* ptr = nullptr;
    ~ScenarioHandle() { optcert_scenario_free(ptr); }
};

struct ReportHandle {
    optcert_report* ptr = nullptr;
    ~ReportHandle() { optcert_report_free(ptr); }
};

bool is_builtin(const std::string& name) {
    const std::string names = optcert_builtin_names();
    return names.find(name + "\n") == 0 || names.find("\n" + name + "\n") != std::string::npos;
}

// A path that does not exist falls back to a builtin of the same name.
optcert_status open_scenario(const std::string& arg, ScenarioHandle& h) {
    if (!std::filesystem::exists(arg) && is_builtin(arg)) return optcert_scenario_builtin(arg.c_str(), &h.ptr);
    return optcert_scenario_load(arg.c_str(), &h.ptr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Argmin-equivalence certificates for predictive models of finite MDPs"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(optcert_version()));

    double tol = 0.0;
    std::string out_path;
    std::string format = "table";
    std::uint64_t seed = 0;
    std::size_t omega_horizon = 0;
    app.add_option("--tol", tol, "Value-iteration tolerance")->check(CLI::PositiveNumber);
    app.add_option("--out", out_path, "Write the JSON report to this path");
    app.add_option("--format", format, "Standard output format")->check(CLI::IsMember({"json", "table"}));
    app.add_option("--seed", seed, "Random seed for simulation");
    app.add_option("--omega-horizon", omega_horizon, "Propagation depth for the bad-state set (0: number of states)");

    std::string scenario_arg;
    std::string model = "expectation";
    std::string models;
    std::string terminal = "scenario";
    std::string policy = "optimal";
    std::size_t horizon = 0;
    std::size_t episodes = 10000;
    std::size_t truncate = 500;
    bool deterministic = false;

    auto* solve = app.add_subcommand("solve", "Solve the true MDP");
    solve->add_option("scenario", scenario_arg, "Scenario file or builtin name")->required();

    auto* certify = app.add_subcommand("certify", "Certify or refute argmin equivalence for a model");
    certify->add_option("scenario", scenario_arg)->required();
    certify->add_option("--model", model, "expectation|mle|synthesized-kernel|synthesized-deterministic|perfect|file:<path>");

    auto* suff = app.add_subcommand("suffcheck", "Check the constant-offset sufficient condition");
    suff->add_option("scenario", scenario_arg)->required();
    suff->add_option("--model", model);

    auto* synth = app.add_subcommand("synthesize", "Build a value-matched model");
    synth->add_option("scenario", scenario_arg)->required();
    synth->add_flag("--deterministic", deterministic, "Restrict to deterministic successors");

    auto* mpc = app.add_subcommand("mpc", "Finite-horizon MPC with a deterministic model");
    mpc->add_option("scenario", scenario_arg)->required();
    mpc->add_option("--horizon", horizon, "Prediction horizon N");
    mpc->add_option("--terminal", terminal, "vhat|zero|scenario|file:<path>");
    mpc->add_option("--model", model);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate of a closed-loop policy");
    sim->add_option("scenario", scenario_arg)->required();
    sim->add_option("--policy", policy, "optimal|model:<spec>|actions:<a0,a1,...>");
    sim->add_option("--episodes", episodes)->check(CLI::PositiveNumber);
    sim->add_option("--truncate", truncate, "Steps per episode");
    sim->add_option("--seed", seed);

    auto* demo = app.add_subcommand("demo", "Compare the baseline models on a builtin scenario");
    demo->add_option("name", scenario_arg)->required();

    auto* compare = app.add_subcommand("compare", "Compare model families on a scenario");
    compare->add_option("scenario", scenario_arg)->required();
    compare->add_option("--models", models, "Comma-separated model specs");


    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    ScenarioHandle sc;
    optcert_status st = OPTCERT_OK;
    if (demo->parsed()) {
        if (!is_builtin(scenario_arg)) {
            std::cerr << "error: unknown builtin '" << scenario_arg << "'\n";
            return kExitUsage;
        }
        st = optcert_scenario_builtin(scenario_arg.c_str(), &sc.ptr);
    } else {
        st = open_scenario(scenario_arg, sc);
    }
    if (st != OPTCERT_OK) {
        std::cerr << "error: " << optcert_last_error() << "\n";
        return exit_code(st);
    }

    const optcert_options opts{tol, 0.0, 0, omega_horizon};
    ReportHandle rep;
    if (solve->parsed()) st = optcert_solve(sc.ptr, &opts, &rep.ptr);
    else if (certify->parsed()) st = optcert_certify(sc.ptr, model.c_str(), &opts, &rep.ptr);
    else if (suff->parsed()) st = optcert_suffcheck(sc.ptr, model.c_str(), &opts, &rep.ptr);
    else if (synth->parsed()) st = optcert_synthesize(sc.ptr, deterministic ? 1 : 0, &opts, &rep.ptr);
    else if (mpc->parsed()) st = optcert_mpc(sc.ptr, model.c_str(), horizon, terminal.c_str(), &opts, &rep.ptr);
    else if (sim->parsed()) st = optcert_simulate(sc.ptr, policy.c_str(), episodes, seed, truncate, &opts, &rep.ptr);
    else if (demo->parsed()) st = optcert_compare(sc.ptr, nullptr, &opts, &rep.ptr);
    else st = optcert_compare(sc.ptr, models.c_str(), &opts, &rep.ptr);

    if (rep.ptr == nullptr) {
        std::cerr << "error: " << optcert_last_error() << "\n";
        return exit_code(st);
    }
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out || !(out << optcert_report_json(rep.ptr))) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return kExitUsage;
        }
    }
    std::cout << (format == "json" ? optcert_report_json(rep.ptr) : optcert_report_table(rep.ptr));
    return exit_code(st);
}
