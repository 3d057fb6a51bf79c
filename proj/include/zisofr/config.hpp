#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zisofr/analysis.hpp"
#include "zisofr/recovery.hpp"
#include "zisofr/simulator.hpp"
#include "zisofr/sofr.hpp"

namespace zisofr::io {

enum class Command { simulate, fit, bootstrap, study };

std::string_view to_string(Command command);
Command parse_command(std::string_view name);

struct FitOptions {
    recovery::Method method = recovery::Method::mm;
    sofr::BasisSpec basis = sofr::kDefaultBSpline;
    recovery::ActivationMethod activation = recovery::ActivationMethod::logistic_pointwise;
    Family family = Family::gaussian;
};

struct DataPaths {
    std::string w_path;
    std::string subjects_path;
    std::string truth_path;  // optional; latent curves for the benchmark method
    int grid_len = grid::kDefaultGridSize;
};

struct RunConfig {
    Command command = Command::simulate;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out_dir = "out";
    sim::SimConfig simulation;
    analysis::StudyConfig study;  // study.base mirrors `simulation`
    FitOptions fit;
    int B = 500;
    double alpha = 0.05;
    DataPaths data;
    // Every recognised key with its effective value, in canonical form.
    std::vector<std::pair<std::string, std::string>> resolved;
};

// Canonical keys (section.name) accepted in config files.
std::vector<std::string> config_keys();

// Parses flat `key = value` text. Lines starting with '#' or ';' are comments.
// Keys are either `section.name`, a bare `name` under a `[section]` header, or a
// bare `name` outside any section (run.* then simulation.* win ties).
// Errors (UsageError / ParameterDomainError) name the key and line.
RunConfig parse_config_text(std::string_view text, std::string_view source = "<config>");
RunConfig parse_config(const std::filesystem::path& path);

// Validates cross-field constraints and syncs study.base with simulation.
void finalize(RunConfig& config);

}  // namespace zisofr::io
