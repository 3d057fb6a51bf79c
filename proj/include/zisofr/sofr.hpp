#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "zisofr/dataset.hpp"
#include "zisofr/grid_kernels.hpp"

namespace zisofr::sofr {

enum class BasisFamily { bspline_cubic, fourier };

std::string_view to_string(BasisFamily family);
BasisFamily parse_basis_family(std::string_view name);

struct BasisSpec {
    BasisFamily family = BasisFamily::bspline_cubic;
    int K = 7;

    // Throws ParameterDomainError unless K >= 1 (K >= 4 for cubic splines).
    void validate() const;
    [[nodiscard]] std::string label() const;
};

inline constexpr BasisSpec kDefaultBSpline{BasisFamily::bspline_cubic, 7};
inline constexpr BasisSpec kDefaultFourier{BasisFamily::fourier, 5};

// Interior knots of the cubic spline basis: K - 4 equally spaced points in (0, 1).
std::vector<double> interior_knots(int K);

// K x m matrix, row k = k-th basis function on the grid.
// Fourier: 1, then sqrt2 sin(2 pi l t), sqrt2 cos(2 pi l t) for l = 1, 2, ...
Eigen::MatrixXd basis_eval(const BasisSpec& spec, const grid::TimeGrid& grid);
Eigen::MatrixXd basis_eval(const BasisSpec& spec, const Eigen::VectorXd& points);

// measure * mean(values)
double riemann_integrate(const Eigen::Ref<const Eigen::VectorXd>& values, const grid::TimeGrid& grid);

struct Design {
    Eigen::MatrixXd matrix;  // n x (K + 1 + p): scores, intercept, covariates
    int n_basis = 0;
    BasisSpec basis;
    std::vector<std::string> column_names;
};

// n x K matrix of Riemann-sum projections of each curve on the basis.
Eigen::MatrixXd functional_scores(const Eigen::MatrixXd& x_hat, const BasisSpec& spec, const grid::TimeGrid& grid);

// Rank deficiency throws CollinearityError naming the dependent columns.
Design build_design(const Eigen::MatrixXd& x_hat, const Eigen::MatrixXd& z, const BasisSpec& spec,
                    const grid::TimeGrid& grid, const std::vector<std::string>& covariate_names = {});

struct GlmOptions {
    int max_iterations = 100;
    double score_tolerance = 1e-8;
    double prob_clamp = 1e-10;
};

struct SofrFit {
    Eigen::VectorXd c;          // basis coefficients
    Eigen::VectorXd gamma_hat;  // intercept, then covariates
    Family family = Family::gaussian;
    double dispersion = 1.0;
    bool converged = false;
    int iterations = 0;
    // Bernoulli only: fitted probabilities hit the clamp or coefficients diverged.
    bool separated = false;
    double max_abs_score = 0.0;
    BasisSpec basis;

    [[nodiscard]] Eigen::VectorXd coefficients() const;
};

// Gaussian: least squares by QR. Bernoulli: logistic IRLS. Throws DataError on
// bad outcomes or too few rows, NumericalError on non-convergence without
// separation.
SofrFit fit_glm(const Design& design, const Eigen::VectorXd& y, Family family, const GlmOptions& options = {});

Eigen::VectorXd reconstruct_beta(const SofrFit& fit, const grid::TimeGrid& grid);
Eigen::VectorXd reconstruct_beta(const Eigen::VectorXd& c, const BasisSpec& basis, const grid::TimeGrid& grid);

// Convenience: build_design + fit_glm using the dataset's covariates and outcomes.
SofrFit fit_sofr(const Dataset& data, const Eigen::MatrixXd& x_hat, const BasisSpec& spec, Family family);

}  // namespace zisofr::sofr
