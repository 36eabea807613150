#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stars/config.hpp"
#include "stars/errors.hpp"

using namespace stars;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output; // stdout + stderr
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(STARS_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    CliResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::size_t got = fread(buf.data(), 1, buf.size(), pipe)) result.output.append(buf.data(), got);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("stars_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("list-problems prints the catalog") {
    const CliResult table = run_cli("list-problems");
    CHECK(table.exit_code == 0);
    CHECK(table.output.find("SROSENBR") != std::string::npos);
    CHECK(table.output.find("4e-05") != std::string::npos);
    // one row per catalog entry plus the header
    long rows = -1;
    std::istringstream in(table.output);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 8);

    const CliResult json_out = run_cli("list-problems --format json");
    CHECK(json_out.exit_code == 0);
    const auto parsed = nlohmann::json::parse(json_out.output);
    CHECK(parsed.is_array());
    CHECK(parsed.size() == 8);
    CHECK(parsed[0].contains("h_opt"));
}

TEST_CASE("solve happy path writes trace and summary") {
    const fs::path dir = fresh_dir("solve");
    const CliResult result = run_cli(
        "solve --problem SROSENBR --ensemble gaussian --p 5 --seed 7 --budget-mult 3 --out " +
        dir.string());
    CHECK(result.exit_code == 0);
    CHECK(fs::exists(dir / "trace.csv"));
    CHECK(fs::exists(dir / "summary.json"));

    std::ifstream summary(dir / "summary.json");
    const auto j = nlohmann::json::parse(summary);
    CHECK(j["termination"] == "budget");
    CHECK(j["config"]["seed"] == 7);
    CHECK(j["config"]["solve"]["problem"] == "SROSENBR");

    // config echo reparses to an equivalent config
    const RunConfigFile echo = RunConfigFile::from_json(j["config"]);
    CHECK(echo.seed == 7);
    CHECK(echo.problem == "SROSENBR");
    CHECK(echo.p == 5);
    CHECK(echo.to_json() == j["config"]);
    fs::remove_all(dir);
}

TEST_CASE("invalid eta1 exits nonzero citing the constraint") {
    const fs::path dir = fresh_dir("badeta");
    const CliResult result = run_cli(
        "solve --problem SROSENBR --ensemble gaussian --p 2 --eta1 1.5 --budget-mult 2 --out " +
        dir.string());
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("(0,1)") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("identity ensemble forces p = n with a warning") {
    const fs::path dir = fresh_dir("identp");
    const CliResult result = run_cli(
        "solve --problem SROSENBR --ensemble identity --p 5 --budget-mult 3 --nk 1 --out " +
        dir.string());
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("warning") != std::string::npos);
    CHECK(result.output.find("p = n = 100") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("unknown problem and unknown config keys are usage errors") {
    CHECK(run_cli("solve --problem NOSUCH").exit_code == 1);

    const fs::path dir = fresh_dir("badkey");
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "config.json");
        out << R"({"schema_version":1,"seed":1,"not_a_key":true})";
    }
    const CliResult result = run_cli("solve --config " + (dir / "config.json").string());
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("not_a_key") != std::string::npos);

    {
        std::ofstream out(dir / "config.json");
        out << R"({"schema_version":99})";
    }
    CHECK(run_cli("solve --config " + (dir / "config.json").string()).exit_code == 1);
    fs::remove_all(dir);
}

TEST_CASE("print-default-config emits a loadable template") {
    const CliResult result = run_cli("print-default-config");
    CHECK(result.exit_code == 0);
    const auto j = nlohmann::json::parse(result.output);
    const RunConfigFile config = RunConfigFile::from_json(j);
    CHECK(config.schema_version == 1);
    CHECK(config.has_grid);
    CHECK(config.grid.variants.size() == 3);
}

TEST_CASE("bench dry run reports the grid size without records") {
    const fs::path dir = fresh_dir("dry");
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "config.json");
        nlohmann::json j = default_config_json();
        j["bench"]["problems"] = {"SROSENBR", "BROYDN3D"};
        j["bench"]["replications"] = 2;
        j["output_dir"] = (dir / "out").string();
        out << j.dump();
    }
    const CliResult result = run_cli("bench --config " + (dir / "config.json").string() +
                                     " --dry-run");
    CHECK(result.exit_code == 0);
    // 2 problems x 2 forms x 2 dists x 2 reps = 16 instances, x3 variants = 48
    CHECK(result.output.find("16 instances x 3 variants = 48 runs") != std::string::npos);
    CHECK(!fs::exists(dir / "out" / "records"));
    fs::remove_all(dir);
}

TEST_CASE("bench end to end on a small grid emits profiles") {
    const fs::path dir = fresh_dir("bench");
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "config.json");
        nlohmann::json j;
        j["schema_version"] = 1;
        j["seed"] = 4242;
        j["output_dir"] = (dir / "out").string();
        j["bench"] = {{"problems", {"SROSENBR"}},
                      {"noise_forms", {"additive"}},
                      {"distributions", {"normal"}},
                      {"sigma", 1e-3},
                      {"replications", 2},
                      {"budget_mult", 20},
                      {"taus", {1e-1}},
                      {"n_samples", 1},
                      {"variants",
                       {{{"label", "G-STARS-2"}, {"ensemble", "gaussian"}, {"p", 2}},
                        {{"label", "G-STARS-5"}, {"ensemble", "gaussian"}, {"p", 5}}}}};
        out << j.dump();
    }
    const CliResult result = run_cli("bench --config " + (dir / "config.json").string());
    CHECK(result.exit_code == 0);
    CHECK(fs::exists(dir / "out" / "profile_tau1e-1.svg"));
    CHECK(fs::exists(dir / "out" / "manifest.json"));
    int record_files = 0;
    for (const auto& entry : fs::directory_iterator(dir / "out" / "records")) {
        (void)entry;
        ++record_files;
    }
    CHECK(record_files == 4);
    CHECK(result.output.find("fraction solved") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("runtime failures exit with code 2 and leave a partial trace") {
    // a huge initial radius throws the first trial point into exp overflow
    const fs::path dir = fresh_dir("overflow");
    const CliResult result = run_cli(
        "solve --problem Penalty2 --ensemble gaussian --p 2 --delta0 5000 --delta-max 10000 "
        "--budget-mult 5 --out " + dir.string());
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("non-finite") != std::string::npos);
    CHECK(fs::exists(dir / "trace.csv"));
    fs::remove_all(dir);
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run_cli("").exit_code == 1);               // missing subcommand
    CHECK(run_cli("bench").exit_code == 1);          // missing --config
    CHECK(run_cli("frobnicate").exit_code == 1);     // unknown subcommand
    CHECK(run_cli("solve").exit_code == 1);          // no problem selected
}
