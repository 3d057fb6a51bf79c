#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "zisofr/analysis.hpp"
#include "zisofr/dataset.hpp"

namespace zisofr::io {

// Shortest text that parses back to the same double (17 significant digits).
std::string format_number(double value);
double parse_number(std::string_view text);

// Long proxy table: subject_id,replicate,t_index,value  (replicate from 1)
// Subject table:    subject_id,y,<covariate names...>
void save_dataset(const Dataset& data, const std::filesystem::path& w_path, const std::filesystem::path& subjects_path);

// Grid is uniform on [0, 1] with grid_len points. Subjects keep the order of
// the subject table. With `family` bernoulli, y must be 0 or 1.
// Throws DataError with file name and line number on any schema violation.
Dataset load_dataset(const std::filesystem::path& w_path, const std::filesystem::path& subjects_path, int grid_len,
                     std::optional<Family> family = std::nullopt);

// Latent curves: subject_id,t_index,value
void save_curves(const Dataset& data, const Eigen::MatrixXd& x, const std::filesystem::path& path);
Eigen::MatrixXd load_curves(const Dataset& data, const std::filesystem::path& path);

struct BetaRow {
    std::string method;
    std::string basis;
    std::string level;
    double t = 0.0;
    double estimate = 0.0;
    std::optional<double> lower;
    std::optional<double> upper;
};

void write_beta_csv(const std::vector<BetaRow>& rows, const std::filesystem::path& path);
void write_metrics_csv(const std::vector<analysis::MetricsEntry>& entries, const std::filesystem::path& path);

struct MetricsRow {
    std::string method;
    std::string basis;
    std::string factor;
    std::string level;
    double squared_bias = 0.0;
    double variance = 0.0;
};
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

void write_json(const nlohmann::json& value, const std::filesystem::path& path);

// Writes beta_hat.csv and metrics.csv for a study into out_dir.
void emit_results(const analysis::StudyResult& result, const std::filesystem::path& out_dir);

}  // namespace zisofr::io
