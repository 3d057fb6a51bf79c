#pragma once

#include <span>

#include <Eigen/Dense>

#include "zisofr/activation.hpp"
#include "zisofr/dataset.hpp"

namespace zisofr::recovery {

// Moment estimates at one time point.
struct PointMoments {
    double mu_x = 0.0;
    double var_x = 0.0;
    double var_u = 0.0;
};

// Pointwise moment estimates of the latent mean and variance and of the
// measurement-error variance, with the counts they are built from.
struct MomentEstimates {
    Eigen::VectorXd mu_x;   // grand mean of all W, zeros included
    Eigen::VectorXd var_x;  // spread of p_hat-scaled nonzero subject means
    Eigen::VectorXd var_u;  // pooled within-subject variance of nonzero W
    Eigen::MatrixXi r;      // n x m nonzero counts
    Eigen::VectorXi n_star;   // subjects with r_i(t) >= 1
    Eigen::VectorXi n1_star;  // subjects with r_i(t) >= 2
    Eigen::MatrixXd wbar_star;     // n x m mean of nonzero W (0 where r_i(t) = 0)
    Eigen::VectorXd wbar_star_all; // mean of wbar_star over subjects with r_i(t) >= 1

    [[nodiscard]] PointMoments at(int t) const { return {mu_x[t], var_x[t], var_u[t]}; }
};

// Throws NumericalError naming the time index when n*(t) < 2 or n1*(t) < 1.
MomentEstimates estimate_moments(const Dataset& data, const ActivationEstimate& activation);

// E[X | W_1..W_J] for one subject at one time point under
//   X ~ N(mu_x, var_x),  W_j = 0 w.p. 1-p,  W_j ~ N(X/p, var_u) w.p. p,
// as the ratio of two integrals over x. Both integrals are evaluated with a
// 64-node Gauss-Hermite rule centered and scaled at the posterior mode and
// curvature, in log space with max-subtraction.
//
// Limits: no nonzero replicate or var_x == 0 gives mu_x; var_u == 0 gives
// p times the mean nonzero replicate.
double rc_conditional_expectation(std::span<const double> w, double p, const PointMoments& moments);

}  // namespace zisofr::recovery
