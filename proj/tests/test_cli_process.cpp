#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

// End-to-end exit-code contract of the installed binary.

#ifndef BIFOL_CLI_PATH
#define BIFOL_CLI_PATH "bifol"
#endif
#ifndef BIFOL_CONFIG_DIR
#define BIFOL_CONFIG_DIR "configs"
#endif

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
    const std::string cmd = std::string(BIFOL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "bifol_cli_proc";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("cli: successful run exits 0") {
    const fs::path out = work_dir();
    CHECK(run("rotnum --config " + std::string(BIFOL_CONFIG_DIR) +
              "/rotnum_golden.json --out " + out.string()) == 0);
    CHECK(fs::exists(out / "rotnum_golden_report.json"));
}

TEST_CASE("cli: unknown command exits 64") {
    CHECK(run("frobnicate --config nowhere.json") == 64);
}

TEST_CASE("cli: missing required flag exits 64") {
    CHECK(run("rotnum") == 64);
}

TEST_CASE("cli: invalid config exits 2") {
    const fs::path out = work_dir();
    const fs::path bad = out / "bad.json";
    std::ofstream(bad) << "{\"schema_version\": 99}\n";
    CHECK(run("rotnum --config " + bad.string()) == 2);
}

TEST_CASE("cli: computation error exits 3") {
    const fs::path out = work_dir();
    const fs::path cfg = out / "short_cycle.json";
    std::ofstream(cfg) << R"({
      "schema_version": 1,
      "objects": {"f": {"kind": "foliation", "variant": "linear", "slope": 0.5}},
      "params": {"foliation": "f", "T_max": 5},
      "output": {"report": "c.json"}
    })";
    CHECK(run("cycle --config " + cfg.string() + " --out " + out.string()) == 3);
}

TEST_CASE("cli: quality flags with --strict exit 4") {
    const fs::path out = work_dir();
    const fs::path cfg = out / "flagged.json";
    // epsilon far below the coverage heuristic raises a quality flag but
    // the run still succeeds.
    std::ofstream(cfg) << R"({
      "schema_version": 1,
      "seed": 5,
      "objects": {
        "a0": {"kind": "foliation", "variant": "linear", "slope": 0.41421356},
        "sh": {"kind": "grid_map", "model": "shear", "resolution": 32,
                "amplitude": 0.05, "direction": [0.8, -0.6], "wave": [1.0, 1.0]},
        "a":  {"kind": "foliation", "variant": "pushforward", "base": "a0", "map": "sh"},
        "b":  {"kind": "foliation", "variant": "linear", "slope": -0.73205081}
      },
      "params": {"alpha": "a", "beta": "b", "L": 300, "N": 32, "epsilon": 0.0012,
                 "conjugacy_orbit": 200000, "rotation_iterations": 200000,
                 "verify_samples": 4},
      "output": {"report": "s.json"}
    })";
    const int plain = run("straighten --config " + cfg.string() + " --out " + out.string());
    CHECK(plain == 0);
    const int strict = run("straighten --config " + cfg.string() + " --out " + out.string() +
                           " --strict");
    CHECK(strict == 4);
}
