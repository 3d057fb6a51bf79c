#include "zisofr/grid_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "zisofr/errors.hpp"

namespace zisofr::grid {

TimeGrid::TimeGrid(std::vector<double> points, double measure)
    : points_(std::move(points)), measure_(measure) {
    if (points_.size() < 2) {
        throw ParameterDomainError("TimeGrid: at least 2 points required");
    }
    if (!(measure_ > 0.0)) {
        throw ParameterDomainError("TimeGrid: domain measure must be positive");
    }
    for (std::size_t k = 0; k < points_.size(); ++k) {
        if (!(points_[k] >= 0.0 && points_[k] <= 1.0)) {
            throw ParameterDomainError("TimeGrid: points must lie in [0, 1]");
        }
        if (k > 0 && !(points_[k] > points_[k - 1])) {
            throw ParameterDomainError("TimeGrid: points must be strictly increasing");
        }
    }
}

TimeGrid TimeGrid::uniform(int m) {
    if (m < 2) {
        throw ParameterDomainError("TimeGrid: at least 2 points required");
    }
    std::vector<double> pts(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        pts[static_cast<std::size_t>(k)] = static_cast<double>(k) / (m - 1);
    }
    pts.back() = 1.0;
    return TimeGrid(std::move(pts));
}

double TimeGrid::mesh() const {
    double gap = std::max(points_.front(), 1.0 - points_.back());
    for (std::size_t k = 1; k < points_.size(); ++k) {
        gap = std::max(gap, points_[k] - points_[k - 1]);
    }
    return gap;
}

double TimeGrid::spacing() const {
    return (points_.back() - points_.front()) / static_cast<double>(points_.size() - 1);
}

std::string_view to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::squared_exponential: return "squared_exponential";
        case KernelFamily::spatial_power: return "spatial_power";
        case KernelFamily::two_value: return "two_value";
    }
    return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
    if (name == "squared_exponential" || name == "se") return KernelFamily::squared_exponential;
    if (name == "spatial_power" || name == "ar1") return KernelFamily::spatial_power;
    if (name == "two_value" || name == "compound_symmetry") return KernelFamily::two_value;
    throw ParameterDomainError("unknown kernel family '" + std::string(name) +
                               "' (expected squared_exponential, spatial_power or two_value)");
}

Kernel::Kernel(KernelFamily family, double rho) : family_(family), rho_(rho) {
    const bool ok = family == KernelFamily::squared_exponential ? rho > 0.0
                                                                : (rho > 0.0 && rho < 1.0);
    if (!ok || !std::isfinite(rho)) {
        std::ostringstream msg;
        msg << "kernel " << to_string(family) << ": rho=" << rho << " outside "
            << (family == KernelFamily::squared_exponential ? "(0, inf)" : "(0, 1)");
        throw ParameterDomainError(msg.str());
    }
}

double Kernel::operator()(double s, double t) const {
    const double gap = std::abs(t - s);
    switch (family_) {
        case KernelFamily::squared_exponential:
            return std::exp(-gap * gap / (2.0 * rho_ * rho_));
        case KernelFamily::spatial_power:
            return std::pow(rho_, gap);
        case KernelFamily::two_value:
            return s == t ? 1.0 : rho_;
    }
    return 0.0;
}

Eigen::MatrixXd build_cov_matrix(const CorrelationFn& kappa, const StdDevFn& sd,
                                 const TimeGrid& grid) {
    const int m = grid.size();
    Eigen::VectorXd scale(m);
    for (int a = 0; a < m; ++a) {
        scale[a] = sd(grid[a]);
        if (!(scale[a] >= 0.0)) {
            throw ParameterDomainError("build_cov_matrix: standard deviation must be >= 0");
        }
    }
    Eigen::MatrixXd cov(m, m);
    for (int a = 0; a < m; ++a) {
        cov(a, a) = scale[a] * scale[a] * kappa(grid[a], grid[a]);
        for (int b = a + 1; b < m; ++b) {
            const double v = scale[a] * scale[b] * kappa(grid[a], grid[b]);
            cov(a, b) = v;
            cov(b, a) = v;
        }
    }
    return cov;
}

GaussianSampler::GaussianSampler(Eigen::VectorXd mean, const Eigen::MatrixXd& cov)
    : mean_(std::move(mean)) {
    const Eigen::Index m = mean_.size();
    if (cov.rows() != m || cov.cols() != m) {
        throw std::invalid_argument("GaussianSampler: covariance shape does not match mean");
    }
    const double scale = cov.trace() / static_cast<double>(m);
    if (scale == 0.0 && cov.cwiseAbs().maxCoeff() == 0.0) {
        factor_ = Eigen::MatrixXd::Zero(m, m);
        return;
    }
    if (!(scale > 0.0) || !cov.allFinite()) {
        throw NumericalError("GaussianSampler: covariance has non-positive trace or non-finite entries");
    }

    for (double rel = 1e-10; rel <= 1e-6 * 1.0000001; rel *= 10.0) {
        Eigen::MatrixXd jittered = cov;
        jittered.diagonal().array() += rel * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(jittered);
        if (llt.info() == Eigen::Success) {
            factor_ = llt.matrixL();
            jitter_ = rel * scale;
            return;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("GaussianSampler: eigendecomposition failed");
    }
    if (eig.eigenvalues().minCoeff() < -1e-6 * scale) {
        std::ostringstream msg;
        msg << "GaussianSampler: covariance is indefinite (min eigenvalue "
            << eig.eigenvalues().minCoeff() << ")";
        throw NumericalError(msg.str());
    }
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    factor_ = eig.eigenvectors() * root.asDiagonal();
}

Eigen::VectorXd GaussianSampler::draw(Rng& rng) const {
    return mean_ + factor_ * standard_normal_vector(rng, mean_.size());
}

Eigen::VectorXd sample_gp(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
    return GaussianSampler(mean, cov).draw(rng);
}

}  // namespace zisofr::grid
