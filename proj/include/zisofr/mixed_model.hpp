#pragma once

#include <vector>

#include <Eigen/Dense>

namespace zisofr::recovery {

// One-way random-intercept fit  y_ij = b0 + b_i + e_ij,
// b_i ~ N(0, d2), e_ij ~ N(0, s2), by profiled maximum likelihood.
struct MixedModelFit {
    double b0 = 0.0;
    double d2 = 0.0;
    double s2 = 0.0;
    Eigen::VectorXd blup;         // E[b_i | data]; 0 for empty groups
    Eigen::VectorXd group_means;  // 0 for empty groups
    Eigen::VectorXi group_sizes;
    double log_likelihood = 0.0;
    // d2 truncated at zero (maximum on the boundary of the parameter space).
    bool boundary = false;

    // d2 n_i / (d2 n_i + s2)
    [[nodiscard]] double shrinkage(int group) const;
};

// Search range for the variance ratio d2/s2.
inline constexpr double kMaxVarianceRatio = 1e6;

// Profiled -2 log-likelihood (up to constants) as a function of the variance
// ratio lambda = d2/s2: N log Q(lambda) + sum_i log(1 + n_i lambda), where
// Q is the generalized residual sum of squares at the GLS intercept.
double profiled_deviance(const std::vector<std::vector<double>>& groups, double lambda);

// Requires >= 2 non-empty groups and >= 1 group with >= 2 values; throws
// NumericalError otherwise. Empty groups are allowed and receive blup 0.
MixedModelFit fit_pointwise_mm(const std::vector<std::vector<double>>& groups);

}  // namespace zisofr::recovery
