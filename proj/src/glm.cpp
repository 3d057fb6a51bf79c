#include "zisofr/glm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "zisofr/numerics.hpp"

namespace zisofr::glm {

namespace {

double binomial_deviance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& trials, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = X * beta;
    double dev = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        // -log-likelihood written with log1p(exp()) for stability.
        const double e = eta[i];
        const double log1pexp = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        dev += trials[i] * (log1pexp - y[i] * e);
    }
    return 2.0 * dev;
}

}  // namespace

Eigen::VectorXd logistic_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& trials, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double w = trials.size() ? trials[i] : 1.0;
        resid[i] = w * (y[i] - logistic(eta[i]));
    }
    return X.transpose() * resid;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& trials_in, const LogisticOptions& options) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (y.size() != n || (trials_in.size() != 0 && trials_in.size() != n)) {
        throw std::invalid_argument("fit_logistic: response length does not match design");
    }
    const Eigen::VectorXd trials = trials_in.size() ? trials_in : Eigen::VectorXd::Ones(n);

    LogisticFit fit;
    fit.coef = Eigen::VectorXd::Zero(k);
    double deviance = binomial_deviance(X, y, trials, fit.coef);

    for (int iter = 0; iter <= options.max_iterations; ++iter) {
        const Eigen::VectorXd eta = X * fit.coef;
        Eigen::VectorXd resid(n);
        Eigen::VectorXd weight(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double mu = logistic(eta[i]);
            const double mu_c = std::clamp(mu, options.prob_clamp, 1.0 - options.prob_clamp);
            resid[i] = trials[i] * (y[i] - mu);
            weight[i] = trials[i] * mu_c * (1.0 - mu_c);
        }
        const Eigen::VectorXd score = X.transpose() * resid;
        fit.max_abs_score = score.cwiseAbs().maxCoeff();
        fit.iterations = iter;
        if (fit.max_abs_score < options.score_tolerance) {
            fit.converged = true;
            return fit;
        }
        if (iter == options.max_iterations) break;

        const Eigen::MatrixXd info = X.transpose() * weight.asDiagonal() * X;
        const Eigen::VectorXd step = info.ldlt().solve(score);
        if (!step.allFinite()) break;

        // Halve the Newton step until the deviance does not increase.
        double scale = 1.0;
        Eigen::VectorXd candidate = fit.coef + step;
        double cand_dev = binomial_deviance(X, y, trials, candidate);
        for (int h = 0; h < 30 && !(cand_dev <= deviance * (1.0 + 1e-12) + 1e-300); ++h) {
            scale *= 0.5;
            candidate = fit.coef + scale * step;
            cand_dev = binomial_deviance(X, y, trials, candidate);
        }
        fit.coef = candidate;
        deviance = cand_dev;
    }
    return fit;
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return X.colPivHouseholderQr().solve(y);
}

std::vector<int> dependent_columns(const Eigen::MatrixXd& X, double relative_threshold) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(relative_threshold);
    std::vector<int> out;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index c = qr.rank(); c < X.cols(); ++c) out.push_back(perm[c]);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace zisofr::glm
