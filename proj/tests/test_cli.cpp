#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "transepi/util.hpp"

#include "helpers.hpp"

using namespace transepi;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(TRANSEPI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

struct CityDirs {
    std::string city;
    std::string out;
};

CityDirs make_city(const std::string& tag) {
    CityDirs d;
    d.city = testutil::scratch_dir("cli_city_" + tag);
    d.out = testutil::scratch_dir("cli_out_" + tag);
    REQUIRE(run_cli("synth --out " + d.city +
                    " --stops 16 --routes 8 --trips-per-route 10 --persons 80 --capacity 20"
                    " --city-seed 5") == 0);
    return d;
}

// File content with '#' comment lines removed (the config echo embeds the
// output path, which legitimately differs between runs).
std::string data_lines(const std::string& path) {
    std::string content = read_file(path);
    std::string out;
    size_t pos = 0;
    while (pos < content.size()) {
        size_t nl = content.find('\n', pos);
        if (nl == std::string::npos) nl = content.size();
        if (content[pos] != '#') out += content.substr(pos, nl - pos + 1);
        pos = nl + 1;
    }
    return out;
}

}  // namespace

TEST_CASE("synth writes a parseable city") {
    CityDirs d = make_city("synth");
    CHECK(fs::exists(fs::path(d.city) / "stops.txt"));
    CHECK(fs::exists(fs::path(d.city) / "demand.csv"));
    CHECK(fs::exists(fs::path(d.city) / "manifest.json"));
    CHECK(run_cli("ingest --feed " + d.city + " --demand " + d.city + "/demand.csv") == 0);
}

TEST_CASE("full run produces the artifact set and exit code zero") {
    CityDirs d = make_city("run");
    REQUIRE(run_cli("run --feed " + d.city + " --demand " + d.city + "/demand.csv --out " + d.out +
                    " --runs 200 --n-seeds 3 --threads 2") == 0);
    for (const char* name :
         {"trajectories.csv", "stranded.csv", "contact_edges.csv", "contact_nodes.csv",
          "infection_estimates.csv", "epi_summary.json", "trip_risk.csv", "route_risk.csv",
          "hist_contact_start.csv", "hist_contact_duration.csv", "hist_degree.csv",
          "hist_clique_size.csv", "manifest.json"}) {
        CAPTURE(name);
        CHECK(fs::exists(fs::path(d.out) / name));
    }
    // every output embeds the effective config
    std::string csv = read_file((fs::path(d.out) / "trajectories.csv").string());
    CHECK(csv.rfind("# config {", 0) == 0);
    std::string summary = read_file((fs::path(d.out) / "epi_summary.json").string());
    CHECK(summary.find("\"master_seed\"") != std::string::npos);
    CHECK(summary.find("\"d_max_s\"") != std::string::npos);
}

TEST_CASE("missing demand file fails with a nonzero exit naming the path") {
    CityDirs d = make_city("missing");
    CHECK(run_cli("run --feed " + d.city + " --demand /nonexistent/demand.csv --out " + d.out) !=
          0);
}

TEST_CASE("staged pipeline equals the run command") {
    CityDirs d = make_city("staged");
    std::string flags = " --feed " + d.city + " --demand " + d.city + "/demand.csv --runs 200" +
                        " --n-seeds 3 --threads 2";
    REQUIRE(run_cli("assign" + flags + " --out " + d.out) == 0);
    REQUIRE(run_cli("build-net" + flags + " --out " + d.out) == 0);
    REQUIRE(run_cli("simulate" + flags + " --out " + d.out) == 0);
    REQUIRE(run_cli("report" + flags + " --out " + d.out) == 0);

    std::string staged_out = d.out;
    std::string run_out = testutil::scratch_dir("cli_out_staged_run");
    REQUIRE(run_cli("run" + flags + " --out " + run_out) == 0);
    for (const char* name : {"trajectories.csv", "contact_edges.csv", "infection_estimates.csv",
                             "trip_risk.csv", "route_risk.csv"}) {
        CAPTURE(name);
        CHECK(data_lines((fs::path(staged_out) / name).string()) ==
              data_lines((fs::path(run_out) / name).string()));
    }
}

TEST_CASE("validate judges configs without simulating") {
    CHECK(run_cli("validate") == 0);  // defaults are valid
    CHECK(run_cli("validate --tau -1") != 0);
    CHECK(run_cli("validate --theta 0") != 0);
    CHECK(run_cli("validate --capacity-fractions 0.85") != 0);
    CHECK(run_cli("validate --capacity-fractions 0.85 --interpolate-pmax") == 0);
    CHECK(run_cli("validate --runs 0") != 0);
}

TEST_CASE("config file is honored and flags override it") {
    CityDirs d = make_city("config");
    std::string cfg_path = (fs::path(d.out) / "cfg.json").string();
    {
        std::ofstream cfg(cfg_path);
        cfg << "{\"epi\": {\"n_runs\": 150, \"n_seeds\": 2}, \"assignment\": {\"theta\": 0.3}}";
    }
    REQUIRE(run_cli("run --config " + cfg_path + " --feed " + d.city + " --demand " + d.city +
                    "/demand.csv --out " + d.out + " --threads 2") == 0);
    std::string summary = read_file((fs::path(d.out) / "epi_summary.json").string());
    CHECK(summary.find("\"n_runs\": 150") != std::string::npos);
    CHECK(summary.find("\"theta\": 0.3") != std::string::npos);

    // flag wins over file
    REQUIRE(run_cli("run --config " + cfg_path + " --feed " + d.city + " --demand " + d.city +
                    "/demand.csv --out " + d.out + " --runs 99 --threads 2") == 0);
    summary = read_file((fs::path(d.out) / "epi_summary.json").string());
    CHECK(summary.find("\"n_runs\": 99") != std::string::npos);

    // unknown keys are rejected
    {
        std::ofstream cfg(cfg_path);
        cfg << "{\"epi\": {\"bogus\": 1}}";
    }
    CHECK(run_cli("validate --config " + cfg_path) != 0);
}

TEST_CASE("simulate accepts a direct pmax override") {
    CityDirs d = make_city("pmax");
    std::string flags = " --feed " + d.city + " --demand " + d.city + "/demand.csv --runs 100" +
                        " --n-seeds 2 --threads 2 --out " + d.out;
    REQUIRE(run_cli("assign" + flags) == 0);
    REQUIRE(run_cli("build-net" + flags) == 0);
    REQUIRE(run_cli("simulate" + flags + " --pmax 0.1") == 0);
    std::string summary = read_file((fs::path(d.out) / "epi_summary.json").string());
    CHECK(summary.find("\"p_max\": 0.1") != std::string::npos);
}

TEST_CASE("a grid with one impossible cell finishes the rest and exits 2") {
    CityDirs d = make_city("partial");
    // keeping 0.1% of 80 persons leaves zero passengers: that cell cannot
    // seed an epidemic and fails, the baseline still completes
    int rc = run_cli("grid --feed " + d.city + " --demand " + d.city + "/demand.csv --out " +
                     d.out +
                     " --demand-fractions 1.0 0.001 --capacity-fractions 0.9"
                     " --runs 100 --n-seeds 2 --threads 2");
    CHECK(rc == 2);
    CHECK(fs::exists(fs::path(d.out) / "scenarios" / "d100_c090" / "stats.json"));
    CHECK(!fs::exists(fs::path(d.out) / "scenarios" / "d000_c090" / "stats.json"));
}

TEST_CASE("grid subcommand emits table csvs; single-cell baseline works") {
    CityDirs d = make_city("grid");
    REQUIRE(run_cli("grid --feed " + d.city + " --demand " + d.city + "/demand.csv --out " +
                    d.out +
                    " --demand-fractions 1.0 --capacity-fractions 1.0 --runs 100 --n-seeds 2"
                    " --threads 2") == 0);
    for (const char* name : {"grid_stats.csv", "grid_stranded.csv", "grid_infection.csv",
                             "grid_endangered.csv", "risk_trends.csv", "manifest.json"}) {
        CAPTURE(name);
        CHECK(fs::exists(fs::path(d.out) / name));
    }
    CHECK(fs::exists(fs::path(d.out) / "scenarios" / "d100_c100" / "stats.json"));
}
