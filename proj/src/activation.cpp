#include "zisofr/activation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "zisofr/errors.hpp"
#include "zisofr/glm.hpp"
#include "zisofr/numerics.hpp"

namespace zisofr::recovery {

std::string_view to_string(ActivationMethod method) {
    switch (method) {
        case ActivationMethod::logistic_pointwise: return "logistic_pointwise";
        case ActivationMethod::logistic_smoothed: return "logistic_smoothed";
        case ActivationMethod::proportion: return "proportion";
    }
    return "unknown";
}

ActivationMethod parse_activation_method(std::string_view name) {
    if (name == "logistic_pointwise" || name == "pointwise") return ActivationMethod::logistic_pointwise;
    if (name == "logistic_smoothed" || name == "smoothed") return ActivationMethod::logistic_smoothed;
    if (name == "proportion") return ActivationMethod::proportion;
    throw ParameterDomainError("unknown activation method '" + std::string(name) +
                               "' (expected logistic_pointwise, logistic_smoothed or proportion)");
}

namespace {

// Nonzero counts r_i(t), n x m.
Eigen::MatrixXd nonzero_counts(const Dataset& data) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(data.n(), data.m());
    for (int i = 0; i < data.n(); ++i) {
        const auto& w = data.subjects[static_cast<std::size_t>(i)].w;
        r.row(i) = (w.array() != 0.0).cast<double>().colwise().sum();
    }
    return r;
}

Eigen::VectorXd replicate_counts(const Dataset& data) {
    Eigen::VectorXd J(data.n());
    for (int i = 0; i < data.n(); ++i) J[i] = data.subjects[static_cast<std::size_t>(i)].replicates();
    return J;
}

double pooled_logit(const Eigen::VectorXd& r_col, const Eigen::VectorXd& J) {
    const double prop = std::clamp(r_col.sum() / J.sum(), kActivationClamp, 1.0 - kActivationClamp);
    return logit(prop);
}

void clamp_into(ActivationEstimate& est) {
    est.p_hat = est.p_raw.cwiseMax(kActivationClamp).cwiseMin(1.0 - kActivationClamp);
}

}  // namespace

ActivationEstimate estimate_p_proportion(const Dataset& data) {
    if (data.n() < 1) throw DataError("estimate_p_proportion: empty dataset");
    const Eigen::MatrixXd r = nonzero_counts(data);
    const Eigen::VectorXd J = replicate_counts(data);

    ActivationEstimate est;
    est.method = ActivationMethod::proportion;
    est.p_raw = r.array().colwise() / J.array();
    est.theta_hat = Eigen::MatrixXd::Zero(data.covariate_count() + 1, data.m());
    for (int t = 0; t < data.m(); ++t) est.theta_hat(0, t) = pooled_logit(r.col(t), J);
    clamp_into(est);
    return est;
}

ActivationEstimate estimate_p_logistic(const Dataset& data, bool smoothed) {
    if (data.n() < 1) throw DataError("estimate_p_logistic: empty dataset");
    const int n = data.n();
    const int m = data.m();
    const int p = data.covariate_count();
    const Eigen::MatrixXd r = nonzero_counts(data);
    const Eigen::VectorXd J = replicate_counts(data);

    Eigen::MatrixXd design(n, p + 1);
    design.col(0).setOnes();
    if (p > 0) design.rightCols(p) = data.covariates();
    if (p > 0) {
        const auto dependent = glm::dependent_columns(design);
        if (!dependent.empty()) {
            std::ostringstream msg;
            msg << "estimate_p_logistic: covariate design (1, Z) is rank deficient; dependent columns:";
            for (int c : dependent) msg << ' ' << (c == 0 ? std::string("intercept") : data.covariate_names[static_cast<std::size_t>(c - 1)]);
            throw CollinearityError(msg.str());
        }
    }

    ActivationEstimate est;
    est.method = smoothed ? ActivationMethod::logistic_smoothed : ActivationMethod::logistic_pointwise;
    est.theta_hat = Eigen::MatrixXd::Zero(p + 1, m);
    est.p_raw.resize(n, m);

    const glm::LogisticOptions options{.max_iterations = 50, .score_tolerance = 1e-8, .prob_clamp = 1e-10};
    std::vector<bool> fallback(static_cast<std::size_t>(m), false);

    for (int t = 0; t < m; ++t) {
        const Eigen::VectorXd prop = r.col(t).cwiseQuotient(J);
        if (p == 0) {
            // Subject-level intercepts: the MLE is the per-subject proportion.
            est.p_raw.col(t) = prop;
            est.theta_hat(0, t) = pooled_logit(r.col(t), J);
            continue;
        }
        const glm::LogisticFit fit = glm::fit_logistic(design, prop, J, options);
        const bool separated = !fit.converged || !fit.coef.allFinite() ||
                               fit.coef.cwiseAbs().maxCoeff() > kSeparationBound;
        if (separated) {
            fallback[static_cast<std::size_t>(t)] = true;
            est.fallback_points.push_back(t);
            est.theta_hat(0, t) = pooled_logit(r.col(t), J);
            est.p_raw.col(t) = prop;
            continue;
        }
        est.theta_hat.col(t) = fit.coef;
        est.p_raw.col(t) = (design * fit.coef).unaryExpr([](double e) { return logistic(e); });
    }

    if (smoothed && p > 0) {
        for (int c = 0; c <= p; ++c) {
            est.theta_hat.row(c) = smooth_curve(est.theta_hat.row(c).transpose(), data.grid).transpose();
        }
        for (int t = 0; t < m; ++t) {
            if (fallback[static_cast<std::size_t>(t)]) continue;
            est.p_raw.col(t) =
                (design * est.theta_hat.col(t)).unaryExpr([](double e) { return logistic(e); });
        }
    }
    clamp_into(est);
    return est;
}

ActivationEstimate estimate_activation(const Dataset& data, ActivationMethod method) {
    switch (method) {
        case ActivationMethod::logistic_pointwise: return estimate_p_logistic(data, false);
        case ActivationMethod::logistic_smoothed: return estimate_p_logistic(data, true);
        case ActivationMethod::proportion: return estimate_p_proportion(data);
    }
    throw std::logic_error("estimate_activation: unhandled method");
}

Eigen::VectorXd smooth_curve(const Eigen::VectorXd& values, const grid::TimeGrid& grid) {
    const int m = grid.size();
    if (values.size() != m) {
        throw std::invalid_argument("smooth_curve: values do not match the grid");
    }
    if (m < 4) {
        throw ParameterDomainError("smooth_curve: at least 4 grid points required");
    }
    const double h = 2.0 * grid.spacing();
    Eigen::VectorXd out(m);
    for (int a = 0; a < m; ++a) {
        // Weighted least squares on (1, t - t_a); the intercept is the fit at t_a.
        double s0 = 0, s1 = 0, s2 = 0, y0 = 0, y1 = 0;
        for (int k = 0; k < m; ++k) {
            const double d = grid[k] - grid[a];
            const double w = std::exp(-0.5 * (d / h) * (d / h));
            s0 += w;
            s1 += w * d;
            s2 += w * d * d;
            y0 += w * values[k];
            y1 += w * d * values[k];
        }
        out[a] = (s2 * y0 - s1 * y1) / (s0 * s2 - s1 * s1);
    }
    return out;
}

}  // namespace zisofr::recovery
