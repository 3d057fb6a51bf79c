#include "zisofr/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "zisofr/errors.hpp"
#include "zisofr/numerics.hpp"

namespace zisofr::recovery {

MomentEstimates estimate_moments(const Dataset& data, const ActivationEstimate& activation) {
    const int n = data.n();
    const int m = data.m();
    if (activation.p_hat.rows() != n || activation.p_hat.cols() != m) {
        throw std::invalid_argument("estimate_moments: activation does not match dataset");
    }
    MomentEstimates est;
    est.mu_x = Eigen::VectorXd::Zero(m);
    est.var_x = Eigen::VectorXd::Zero(m);
    est.var_u = Eigen::VectorXd::Zero(m);
    est.r = Eigen::MatrixXi::Zero(n, m);
    est.n_star = Eigen::VectorXi::Zero(m);
    est.n1_star = Eigen::VectorXi::Zero(m);
    est.wbar_star = Eigen::MatrixXd::Zero(n, m);
    est.wbar_star_all = Eigen::VectorXd::Zero(m);

    double total_reps = 0.0;
    for (const auto& s : data.subjects) total_reps += s.replicates();

    for (int t = 0; t < m; ++t) {
        double grand = 0.0;
        double u_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto& w = data.subjects[static_cast<std::size_t>(i)].w;
            int r = 0;
            double sum = 0.0;
            for (Eigen::Index j = 0; j < w.rows(); ++j) {
                grand += w(j, t);
                if (w(j, t) != 0.0) {
                    ++r;
                    sum += w(j, t);
                }
            }
            est.r(i, t) = r;
            if (r == 0) continue;
            const double mean = sum / r;
            est.wbar_star(i, t) = mean;
            ++est.n_star[t];
            if (r > 1) {
                double ss = 0.0;
                for (Eigen::Index j = 0; j < w.rows(); ++j) {
                    if (w(j, t) != 0.0) ss += (w(j, t) - mean) * (w(j, t) - mean);
                }
                u_sum += ss / (r - 1);
                ++est.n1_star[t];
            }
        }
        if (est.n_star[t] < 2 || est.n1_star[t] < 1) {
            std::ostringstream msg;
            msg << "estimate_moments: time index " << t << ": insufficient nonzero data (n*="
                << est.n_star[t] << ", n1*=" << est.n1_star[t] << ")";
            throw NumericalError(msg.str());
        }
        est.mu_x[t] = grand / total_reps;
        double mean_of_means = 0.0;
        for (int i = 0; i < n; ++i) {
            if (est.r(i, t) > 0) mean_of_means += est.wbar_star(i, t);
        }
        mean_of_means /= est.n_star[t];
        est.wbar_star_all[t] = mean_of_means;
        double x_ss = 0.0;
        for (int i = 0; i < n; ++i) {
            if (est.r(i, t) == 0) continue;
            const double dev = activation.p_hat(i, t) * (est.wbar_star(i, t) - mean_of_means);
            x_ss += dev * dev;
        }
        est.var_x[t] = std::max(0.0, x_ss / (est.n_star[t] - 1));
        est.var_u[t] = u_sum / est.n1_star[t];
    }
    return est;
}

double rc_conditional_expectation(std::span<const double> w, double p, const PointMoments& mom) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("rc_conditional_expectation: activation probability outside (0, 1]");
    }
    int r = 0;
    double nz_sum = 0.0;
    for (double v : w) {
        if (v != 0.0) {
            ++r;
            nz_sum += v;
        }
    }
    // Zero replicates contribute (1-p) factors that do not involve x.
    if (r == 0 || mom.var_x <= 0.0) return mom.mu_x;
    if (mom.var_u <= 0.0) return p * nz_sum / r;

    // log of prior(x) * prod_{nonzero j} p * phi(w_j; x/p, var_u).
    const double log_const = r * std::log(p) -
                             0.5 * (r + 1) * std::log(2.0 * std::numbers::pi) -
                             0.5 * r * std::log(mom.var_u) - 0.5 * std::log(mom.var_x);
    auto log_integrand = [&](double x) {
        double acc = log_const - 0.5 * (x - mom.mu_x) * (x - mom.mu_x) / mom.var_x;
        for (double v : w) {
            if (v == 0.0) continue;
            const double d = v - x / p;
            acc -= 0.5 * d * d / mom.var_u;
        }
        return acc;
    };

    // Posterior mode and curvature in x. Each nonzero replicate contributes a
    // Gaussian factor in x with mean p*w_j and variance p^2 var_u.
    const double lik_precision = r / (p * p * mom.var_u);
    const double precision = 1.0 / mom.var_x + lik_precision;
    const double center = (mom.mu_x / mom.var_x + nz_sum / (p * mom.var_u)) / precision;
    const double scale = std::sqrt(2.0 / precision);

    const GaussHermiteRule& rule = gauss_hermite_64();
    const std::size_t nodes = rule.nodes.size();
    std::vector<double> log_terms(nodes);
    std::vector<double> xs(nodes);
    double log_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nodes; ++k) {
        const double z = rule.nodes[k];
        xs[k] = center + scale * z;
        log_terms[k] = rule.log_weights[k] + z * z + log_integrand(xs[k]);
        log_max = std::max(log_max, log_terms[k]);
    }
    if (!std::isfinite(log_max)) {
        throw NumericalError("rc_conditional_expectation: integrand underflows at every quadrature node");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) {
        const double e = std::exp(log_terms[k] - log_max);
        num += e * xs[k];
        den += e;
    }
    if (!(den > 0.0) || !std::isfinite(num / den)) {
        std::ostringstream msg;
        msg << "rc_conditional_expectation: degenerate normalizing integral (mu_x=" << mom.mu_x
            << ", var_x=" << mom.var_x << ", var_u=" << mom.var_u << ", p=" << p << ")";
        throw NumericalError(msg.str());
    }
    return num / den;
}

}  // namespace zisofr::recovery
