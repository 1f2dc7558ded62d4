#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bifol/grid_map.hpp"

namespace bifol {

// A validated run configuration: a registry of named objects (circle
// maps, grid maps, foliations, bi-foliations), command parameters, an
// explicit seed, and output paths.  References between objects must
// resolve acyclically; validation errors are argument_errors.
class RunConfig {
public:
    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_json(nlohmann::ordered_json config);

    const nlohmann::ordered_json& raw() const { return config_; }
    std::uint64_t seed() const;
    void override_seed(std::uint64_t seed);

    // Output path helpers (relative paths resolve against out_dir).
    void set_out_dir(const std::filesystem::path& dir) { out_dir_ = dir; }
    std::filesystem::path report_path() const;
    std::filesystem::path grid_path() const;
    GridFileFormat grid_format() const;

private:
    nlohmann::ordered_json config_;
    std::filesystem::path out_dir_;
};

struct Report {
    std::string command;
    std::string inputs_digest;
    nlohmann::ordered_json payload;
    std::vector<std::string> quality_flags;
    double timing_ms = 0.0;

    nlohmann::ordered_json to_json() const;
};

// Dispatch a command against the configuration.  Commands: rotnum, cycle,
// first-return, straighten, verify, rigidity, symmetries.  Unknown
// commands are argument errors tagged as usage problems by the front end.
Report run_command(const RunConfig& config, const std::string& command);

// Write a report (atomically) and echo it to stdout.
void emit_report(const Report& report, const std::filesystem::path& path);

// The export op: grid maps serialize through the documented layouts.
void export_grid(const GridHomeomorphism& map, const std::filesystem::path& path,
                 GridFileFormat format);

// FNV-1a 64 of the canonical dump; stable across runs and platforms.
std::string digest_hex(const nlohmann::ordered_json& value);

}  // namespace bifol
