#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace zisofr::glm {

struct LogisticOptions {
    int max_iterations = 50;
    double score_tolerance = 1e-8;
    // Fitted probabilities are clamped to [clamp, 1 - clamp] inside the IRLS weights.
    double prob_clamp = 1e-10;
};

struct LogisticFit {
    Eigen::VectorXd coef;
    bool converged = false;
    int iterations = 0;
    double max_abs_score = 0.0;
};

// Binomial-logit maximum likelihood by IRLS (Newton with step halving).
// `y` holds observed proportions in [0, 1]; `trials` the number of Bernoulli
// trials behind each row (all ones for plain 0/1 data, may be empty).
// Convergence: max |X^T diag(trials) (y - mu)| < score_tolerance.
LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& trials = {}, const LogisticOptions& options = {});

// Score vector X^T diag(trials) (y - mu(beta)).
Eigen::VectorXd logistic_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& trials, const Eigen::VectorXd& beta);

// Least-squares solution via column-pivoted Householder QR.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Columns that are linearly dependent on earlier-pivoted columns; empty when
// X has full column rank.
std::vector<int> dependent_columns(const Eigen::MatrixXd& X, double relative_threshold = 1e-10);

}  // namespace zisofr::glm
