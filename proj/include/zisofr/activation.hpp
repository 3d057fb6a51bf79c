#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "zisofr/dataset.hpp"
#include "zisofr/grid_kernels.hpp"

namespace zisofr::recovery {

enum class ActivationMethod { logistic_pointwise, logistic_smoothed, proportion };

std::string_view to_string(ActivationMethod method);
ActivationMethod parse_activation_method(std::string_view name);

// Estimated probabilities are clamped to [kActivationClamp, 1 - kActivationClamp]
// before any division or scaling by p_hat.
inline constexpr double kActivationClamp = 1e-3;

// |theta_hat| above this at a time point is treated as separation.
inline constexpr double kSeparationBound = 15.0;

struct ActivationEstimate {
    Eigen::MatrixXd theta_hat;  // (p+1) x m
    Eigen::MatrixXd p_raw;      // n x m, before clamping
    Eigen::MatrixXd p_hat;      // n x m, clamped
    ActivationMethod method = ActivationMethod::proportion;
    // Time indices where the logistic fit separated and the proportion
    // estimator was used instead.
    std::vector<int> fallback_points;
};

// Per-(i, t) fraction of nonzero replicates, then clamped. theta_hat holds the
// logit of the pooled proportion in its intercept row and zero slopes.
ActivationEstimate estimate_p_proportion(const Dataset& data);

// Pooled logistic regression of 1{W_ij(t) != 0} on (1, Z_i) separately at
// each time point (binomial IRLS on per-subject counts; with independence
// working correlation the GEE point estimate is the same). With `smoothed`,
// each row of theta_hat is smoothed over t before p_hat is formed.
//
// Without covariates the model at each t is the subject-level intercept
// model, whose MLE is the per-subject proportion; theta_hat then reports the
// pooled intercept.
//
// Throws CollinearityError when (1, Z) is rank deficient.
ActivationEstimate estimate_p_logistic(const Dataset& data, bool smoothed);

ActivationEstimate estimate_activation(const Dataset& data, ActivationMethod method);

// Local-linear Gaussian-kernel smoother, bandwidth twice the grid spacing.
// Reproduces linear input exactly.
Eigen::VectorXd smooth_curve(const Eigen::VectorXd& values, const grid::TimeGrid& grid);

}  // namespace zisofr::recovery
