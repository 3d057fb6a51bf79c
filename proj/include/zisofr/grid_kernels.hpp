#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "zisofr/numerics.hpp"

namespace zisofr::grid {

// Ordered observation points on a domain of given Lebesgue measure
// (the unit interval by default).
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> points, double measure = 1.0);

    // m equally spaced points {0, 1/(m-1), ..., 1}.
    static TimeGrid uniform(int m);

    [[nodiscard]] int size() const { return static_cast<int>(points_.size()); }
    [[nodiscard]] double measure() const { return measure_; }
    [[nodiscard]] double operator[](int k) const { return points_[static_cast<std::size_t>(k)]; }
    [[nodiscard]] const std::vector<double>& points() const { return points_; }
    [[nodiscard]] Eigen::Map<const Eigen::VectorXd> as_vector() const {
        return {points_.data(), static_cast<Eigen::Index>(points_.size())};
    }

    // Largest gap between consecutive points, including the domain endpoints.
    [[nodiscard]] double mesh() const;
    // Average spacing between consecutive points.
    [[nodiscard]] double spacing() const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::vector<double> points_;
    double measure_;
};

inline constexpr int kDefaultGridSize = 24;

enum class KernelFamily { squared_exponential, spatial_power, two_value };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

// Correlation kernel with a single range/strength parameter rho.
class Kernel {
public:
    Kernel(KernelFamily family, double rho);

    [[nodiscard]] KernelFamily family() const { return family_; }
    [[nodiscard]] double rho() const { return rho_; }

    [[nodiscard]] double operator()(double s, double t) const;

private:
    KernelFamily family_;
    double rho_;
};

inline double kernel_eval(const Kernel& k, double s, double t) { return k(s, t); }

using CorrelationFn = std::function<double(double, double)>;
using StdDevFn = std::function<double(double)>;

// Entry (a, b) = sd(t_a) sd(t_b) kappa(t_a, t_b).
Eigen::MatrixXd build_cov_matrix(const CorrelationFn& kappa, const StdDevFn& sd,
                                 const TimeGrid& grid);

inline Eigen::MatrixXd build_cov_matrix(const Kernel& k, const StdDevFn& sd,
                                        const TimeGrid& grid) {
    return build_cov_matrix(CorrelationFn{k}, sd, grid);
}

// Multivariate normal sampler with a cached square-root factor.
//
// The covariance is factored as L L^T after adding diagonal jitter
// 1e-10 * trace/m, escalated by 10x up to 1e-6 * trace/m. If every Cholesky
// attempt fails, falls back to an eigendecomposition with negative
// eigenvalues clipped at zero; eigenvalues below -1e-6 * trace/m are treated
// as a genuinely indefinite matrix and raise NumericalError.
class GaussianSampler {
public:
    GaussianSampler(Eigen::VectorXd mean, const Eigen::MatrixXd& cov);

    [[nodiscard]] Eigen::VectorXd draw(Rng& rng) const;
    [[nodiscard]] Eigen::Index dim() const { return mean_.size(); }
    [[nodiscard]] const Eigen::MatrixXd& factor() const { return factor_; }
    [[nodiscard]] double jitter() const { return jitter_; }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd factor_;
    double jitter_ = 0.0;
};

// One draw from N(mean, cov). Factors the covariance on every call; build a
// GaussianSampler when drawing repeatedly from the same distribution.
Eigen::VectorXd sample_gp(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

}  // namespace zisofr::grid
