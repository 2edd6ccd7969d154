#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "optcert/optcert.h"

TEST_CASE("builtin scenario through the C interface") {
    optcert_scenario* sc = nullptr;
    REQUIRE(optcert_scenario_builtin("swamp5", &sc) == OPTCERT_OK);

    optcert_report* rep = nullptr;
    CHECK(optcert_solve(sc, nullptr, &rep) == OPTCERT_OK);
    CHECK(std::string(optcert_report_json(rep)).find("\"command\": \"solve\"") != std::string::npos);
    CHECK(optcert_report_negative(rep) == 0);
    optcert_report_free(rep);

    rep = nullptr;
    CHECK(optcert_certify(sc, "expectation", nullptr, &rep) == OPTCERT_NEGATIVE_VERDICT);
    REQUIRE(rep != nullptr);
    CHECK(std::string(optcert_report_json(rep)).find("\"verdict\": \"refuted\"") != std::string::npos);
    CHECK(std::string(optcert_report_table(rep)).find("(x1,safe)") != std::string::npos);
    optcert_report_free(rep);

    rep = nullptr;
    CHECK(optcert_certify(sc, "bogus", nullptr, &rep) == OPTCERT_USAGE);
    CHECK(rep == nullptr);
    CHECK(std::string(optcert_last_error()).find("bogus") != std::string::npos);

    rep = nullptr;
    CHECK(optcert_compare(sc, "perfect,mle", nullptr, &rep) == OPTCERT_OK);
    optcert_report_free(rep);

    rep = nullptr;
    CHECK(optcert_mpc(sc, "expectation", 4, "vhat", nullptr, &rep) == OPTCERT_OK);
    optcert_report_free(rep);

    rep = nullptr;
    CHECK(optcert_simulate(sc, "optimal", 0, 1, 10, nullptr, &rep) == OPTCERT_USAGE);
    CHECK(optcert_simulate(sc, "optimal", 100, 1, 10, nullptr, &rep) == OPTCERT_OK);
    optcert_report_free(rep);

    optcert_options o{1e-12, 0.0, 2, 0};
    rep = nullptr;
    CHECK(optcert_solve(sc, &o, &rep) == OPTCERT_NONCONVERGENCE);

    optcert_scenario_free(sc);
}

TEST_CASE("scenario files through the C interface") {
    optcert_scenario* sc = nullptr;
    CHECK(optcert_scenario_load("/nonexistent/missing.json", &sc) == OPTCERT_NOT_FOUND);
    CHECK(std::string(optcert_last_error()).find("missing.json") != std::string::npos);
    CHECK(optcert_scenario_builtin("nowhere", &sc) != OPTCERT_OK);

    REQUIRE(optcert_scenario_builtin("cliffgrid", &sc) == OPTCERT_OK);
    const std::string path = (std::filesystem::temp_directory_path() / "optcert_capi.json").string();
    CHECK(optcert_scenario_save(sc, path.c_str()) == OPTCERT_OK);
    optcert_scenario* back = nullptr;
    CHECK(optcert_scenario_load(path.c_str(), &back) == OPTCERT_OK);

    optcert_report *a = nullptr, *b = nullptr;
    CHECK(optcert_solve(sc, nullptr, &a) == OPTCERT_OK);
    CHECK(optcert_solve(back, nullptr, &b) == OPTCERT_OK);
    CHECK(std::string(optcert_report_json(a)) == std::string(optcert_report_json(b)));
    optcert_report_free(a);
    optcert_report_free(b);
    optcert_scenario_free(back);
    optcert_scenario_free(sc);
    std::remove(path.c_str());

    CHECK(std::string(optcert_builtin_names()).find("swamp5\n") != std::string::npos);
    CHECK(optcert_solve(nullptr, nullptr, &a) == OPTCERT_USAGE);
}
