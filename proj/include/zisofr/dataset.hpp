#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "zisofr/grid_kernels.hpp"

namespace zisofr {

enum class Family { gaussian, bernoulli };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

// One subject: outcome, scalar covariates and the J_i x m matrix of
// zero-inflated proxy curves (one replicate per row).
struct SubjectRecord {
    std::string id;
    Eigen::VectorXd z;
    double y = 0.0;
    Eigen::MatrixXd w;

    [[nodiscard]] int replicates() const { return static_cast<int>(w.rows()); }
};

struct Dataset {
    grid::TimeGrid grid = grid::TimeGrid::uniform(grid::kDefaultGridSize);
    std::vector<std::string> covariate_names;
    std::vector<SubjectRecord> subjects;

    [[nodiscard]] int n() const { return static_cast<int>(subjects.size()); }
    [[nodiscard]] int m() const { return grid.size(); }
    [[nodiscard]] int covariate_count() const { return static_cast<int>(covariate_names.size()); }

    // n x p covariate matrix (without intercept).
    [[nodiscard]] Eigen::MatrixXd covariates() const;
    [[nodiscard]] Eigen::VectorXd outcomes() const;

    // Subset (with repetition) in the given order; ids are suffixed so they stay unique.
    [[nodiscard]] Dataset resample(const std::vector<int>& rows) const;

    // Shape and value checks: conformable matrices, finite values, J_i >= 1.
    void validate() const;
};

// FNV-1a hash over the numeric content of a dataset (grid, covariates,
// outcomes, proxies). Used to check that methods see identical inputs.
std::uint64_t content_hash(const Dataset& data);

}  // namespace zisofr
