#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "zisofr/dataset.hpp"
#include "zisofr/recovery.hpp"
#include "zisofr/simulator.hpp"
#include "zisofr/sofr.hpp"

namespace zisofr::analysis {

struct CurveMetrics {
    double squared_bias = 0.0;
    double variance = 0.0;
};

// squared bias = integral of (mean curve - truth)^2,
// variance = integral of the per-point sample variance (divisor R - 1).
CurveMetrics compute_metrics(const std::vector<Eigen::VectorXd>& beta_hats, const Eigen::VectorXd& beta_true,
                             const grid::TimeGrid& grid);

enum class Factor { none, n, sigma_u, kernel, rho_u, zero_proportion, q_g, family };

std::string_view to_string(Factor factor);
Factor parse_factor(std::string_view name);

// Applies one sweep level (textual, as written in configs) to a simulation
// config. Levels per factor:
//   n: integer >= 2;  sigma_u: > 0;  rho_u: kernel-admissible rho;
//   kernel: family name, optionally ":rho" (e.g. spatial_power:0.4);
//   zero_proportion: one of 0.255, 0.294, 0.335, 0.403;  q_g: [0, 1);
//   family: gaussian | bernoulli.
// Throws ParameterDomainError for inadmissible levels.
void apply_level(sim::SimConfig& config, Factor factor, std::string_view level);

struct StudyConfig {
    sim::SimConfig base;
    int replicates = 500;
    std::vector<recovery::Method> methods{std::begin(recovery::kAllMethods), std::end(recovery::kAllMethods)};
    std::vector<sofr::BasisSpec> bases{sofr::kDefaultBSpline, sofr::kDefaultFourier};
    Factor factor = Factor::none;
    std::vector<std::string> levels;
    std::uint64_t seed = 1;
    recovery::ActivationMethod activation = recovery::ActivationMethod::logistic_pointwise;
    // 0 = available hardware concurrency.
    int threads = 0;
    bool keep_curves = false;
    double max_failure_fraction = 0.05;

    void validate() const;
};

struct MetricsEntry {
    recovery::Method method = recovery::Method::benchmark;
    sofr::BasisSpec basis;
    std::string factor;
    std::string level;
    double squared_bias = 0.0;
    double variance = 0.0;
    int replicates_used = 0;
    int failures = 0;
    Eigen::VectorXd mean_curve;
    std::vector<Eigen::VectorXd> curves;  // only with keep_curves
};

struct StudyResult {
    std::vector<MetricsEntry> entries;  // level-major, then method, then basis
    grid::TimeGrid grid = grid::TimeGrid::uniform(grid::kDefaultGridSize);
    // hashes[level][replicate][method]: content hash of the dataset each method received
    std::vector<std::vector<std::vector<std::uint64_t>>> hashes;
    std::vector<std::string> failure_messages;
};

// Seed of replicate r; identical across levels and methods.
std::uint64_t replicate_seed(std::uint64_t master, int replicate);

// Throws NumericalError when a method fails on more than max_failure_fraction of replicates.
StudyResult run_study(const StudyConfig& config);

struct BootstrapOptions {
    recovery::Method method = recovery::Method::mm;
    sofr::BasisSpec basis = sofr::kDefaultBSpline;
    Family family = Family::gaussian;
    recovery::RecoveryOptions recovery;
    int B = 500;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    int threads = 0;
};

struct BootstrapBand {
    Eigen::VectorXd estimate;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    int B = 0;
    int failures = 0;
    std::uint64_t seed = 0;
};

// Fits the full pipeline (recovery, activation re-estimation, SoFR) on the
// data and on B subject-level resamples. `true_x` is needed only for the
// benchmark method. Throws NumericalError if more than 10% of resamples fail.
BootstrapBand bootstrap_band(const Dataset& data, const Eigen::MatrixXd* true_x, const BootstrapOptions& options);

// Recovery + fit + reconstruction for one dataset.
Eigen::VectorXd estimate_beta(const Dataset& data, const Eigen::MatrixXd* true_x, recovery::Method method,
                              const sofr::BasisSpec& basis, Family family,
                              const recovery::RecoveryOptions& options = {});

int resolve_threads(int requested);

}  // namespace zisofr::analysis
