#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "bifol/cli.hpp"
#include "bifol/errors.hpp"
#include "bifol/parallel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitComputation = 3;
constexpr int kExitQualityStrict = 4;
constexpr int kExitUsage = 64;

const char* kCommands[] = {"rotnum",  "cycle",    "first-return", "straighten",
                           "verify",  "rigidity", "symmetries"};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bifol: invariants and simultaneous straightening of torus bi-foliations"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool strict = false;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 1;

    for (const char* name : kCommands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration file (json)")
            ->required();
        sub->add_option("--out", out_dir, "directory for report and grid outputs");
        sub->add_flag("--strict", strict, "exit 4 when quality flags are raised");
        sub->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--threads", threads, "worker threads (0 = hardware)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    const std::string command = app.get_subcommands().front()->get_name();

    try {
        bifol::set_thread_count(threads);
        auto config = bifol::RunConfig::from_file(config_path);
        if (!out_dir.empty()) config.set_out_dir(out_dir);
        if (seed_given) config.override_seed(seed);

        const auto report = bifol::run_command(config, command);
        bifol::emit_report(report, config.report_path());

        if (strict && !report.quality_flags.empty()) {
            std::fprintf(stderr, "bifol: quality flags raised (strict mode)\n");
            return kExitQualityStrict;
        }
        return kExitOk;
    } catch (const bifol::computation_error& e) {
        std::fprintf(stderr, "bifol: computation failed: %s\n", e.what());
        return kExitComputation;
    } catch (const bifol::argument_error& e) {
        std::fprintf(stderr, "bifol: invalid input: %s\n", e.what());
        return kExitValidation;
    } catch (const bifol::io_error& e) {
        std::fprintf(stderr, "bifol: io failure: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "bifol: internal error: %s\n", e.what());
        return kExitComputation;
    }
}
