#include "zisofr/sofr.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "zisofr/errors.hpp"
#include "zisofr/glm.hpp"
#include "zisofr/numerics.hpp"

namespace zisofr::sofr {

std::string_view to_string(BasisFamily family) {
    switch (family) {
        case BasisFamily::bspline_cubic: return "bspline";
        case BasisFamily::fourier: return "fourier";
    }
    return "unknown";
}

BasisFamily parse_basis_family(std::string_view name) {
    if (name == "bspline" || name == "bspline_cubic") return BasisFamily::bspline_cubic;
    if (name == "fourier") return BasisFamily::fourier;
    throw ParameterDomainError("unknown basis '" + std::string(name) + "' (expected bspline or fourier)");
}

void BasisSpec::validate() const {
    if (K < 1) throw ParameterDomainError("basis size K must be >= 1");
    if (family == BasisFamily::bspline_cubic && K < 4) {
        throw ParameterDomainError("cubic B-spline basis needs K >= 4");
    }
}

std::string BasisSpec::label() const { return std::string(to_string(family)); }

std::vector<double> interior_knots(int K) {
    const int count = K - 4;
    std::vector<double> knots;
    for (int k = 1; k <= count; ++k) knots.push_back(static_cast<double>(k) / (count + 1));
    return knots;
}

namespace {

Eigen::MatrixXd bspline_eval(int K, const Eigen::VectorXd& points) {
    constexpr int degree = 3;
    std::vector<double> knots(degree + 1, 0.0);
    for (double k : interior_knots(K)) knots.push_back(k);
    knots.insert(knots.end(), degree + 1, 1.0);
    const int n_knots = static_cast<int>(knots.size());

    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(K, points.size());
    std::vector<double> b(static_cast<std::size_t>(n_knots - 1));
    for (Eigen::Index col = 0; col < points.size(); ++col) {
        const double t = points[col];
        // order-1 pieces; the right endpoint belongs to the last nonempty span
        int span = -1;
        for (int i = 0; i < n_knots - 1; ++i) {
            if (knots[i] < knots[i + 1] && t >= knots[i] && t < knots[i + 1]) span = i;
        }
        if (span < 0 && t >= knots.back()) {
            for (int i = n_knots - 2; i >= 0; --i) {
                if (knots[i] < knots[i + 1]) { span = i; break; }
            }
        }
        std::fill(b.begin(), b.end(), 0.0);
        if (span >= 0) b[static_cast<std::size_t>(span)] = 1.0;
        for (int d = 1; d <= degree; ++d) {
            for (int i = 0; i + d + 1 < n_knots; ++i) {
                double v = 0.0;
                const double left = knots[i + d] - knots[i];
                const double right = knots[i + d + 1] - knots[i + 1];
                if (left > 0) v += (t - knots[i]) / left * b[i];
                if (right > 0) v += (knots[i + d + 1] - t) / right * b[i + 1];
                b[i] = v;
            }
        }
        for (int k = 0; k < K; ++k) out(k, col) = b[static_cast<std::size_t>(k)];
    }
    return out;
}

Eigen::MatrixXd fourier_eval(int K, const Eigen::VectorXd& points) {
    Eigen::MatrixXd out(K, points.size());
    const double root2 = std::numbers::sqrt2;
    for (Eigen::Index col = 0; col < points.size(); ++col) {
        const double t = points[col];
        out(0, col) = 1.0;
        for (int k = 1; k < K; ++k) {
            const int l = (k + 1) / 2;
            const double arg = 2.0 * std::numbers::pi * l * t;
            out(k, col) = (k % 2 == 1) ? root2 * std::sin(arg) : root2 * std::cos(arg);
        }
    }
    return out;
}

}  // namespace

Eigen::MatrixXd basis_eval(const BasisSpec& spec, const Eigen::VectorXd& points) {
    spec.validate();
    return spec.family == BasisFamily::fourier ? fourier_eval(spec.K, points) : bspline_eval(spec.K, points);
}

Eigen::MatrixXd basis_eval(const BasisSpec& spec, const grid::TimeGrid& grid) {
    return basis_eval(spec, grid.as_vector());
}

double riemann_integrate(const Eigen::Ref<const Eigen::VectorXd>& values, const grid::TimeGrid& grid) {
    if (values.size() != grid.size()) {
        throw std::invalid_argument("riemann_integrate: length does not match grid");
    }
    return grid.measure() * values.mean();
}

Eigen::MatrixXd functional_scores(const Eigen::MatrixXd& x_hat, const BasisSpec& spec, const grid::TimeGrid& grid) {
    if (x_hat.cols() != grid.size()) throw DataError("design: curves do not match the grid");
    return (grid.measure() / grid.size()) * x_hat * basis_eval(spec, grid).transpose();
}

Design build_design(const Eigen::MatrixXd& x_hat, const Eigen::MatrixXd& z, const BasisSpec& spec,
                    const grid::TimeGrid& grid, const std::vector<std::string>& covariate_names) {
    if (x_hat.cols() != grid.size()) throw DataError("design: curves do not match the grid");
    if (z.rows() != x_hat.rows()) throw DataError("design: covariate rows do not match curves");
    if (!x_hat.allFinite() || !z.allFinite()) throw DataError("design: non-finite input");
    const Eigen::Index n = x_hat.rows();
    const Eigen::Index p = z.cols();
    Design d;
    d.basis = spec;
    d.n_basis = spec.K;
    d.matrix.resize(n, spec.K + 1 + p);
    d.matrix.leftCols(spec.K) = functional_scores(x_hat, spec, grid);
    d.matrix.col(spec.K).setOnes();
    if (p > 0) d.matrix.rightCols(p) = z;
    for (int k = 0; k < spec.K; ++k) d.column_names.push_back("score_" + std::to_string(k + 1));
    d.column_names.push_back("intercept");
    for (Eigen::Index j = 0; j < p; ++j) {
        d.column_names.push_back(j < static_cast<Eigen::Index>(covariate_names.size())
                                     ? covariate_names[static_cast<std::size_t>(j)]
                                     : "z_" + std::to_string(j + 1));
    }
    const std::vector<int> bad = glm::dependent_columns(d.matrix);
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "design matrix is rank deficient; dependent columns:";
        for (int j : bad) msg << ' ' << d.column_names[static_cast<std::size_t>(j)];
        throw CollinearityError(msg.str());
    }
    return d;
}

Eigen::VectorXd SofrFit::coefficients() const {
    Eigen::VectorXd out(c.size() + gamma_hat.size());
    out << c, gamma_hat;
    return out;
}

SofrFit fit_glm(const Design& design, const Eigen::VectorXd& y, Family family, const GlmOptions& options) {
    const Eigen::MatrixXd& X = design.matrix;
    const Eigen::Index n = X.rows();
    const Eigen::Index cols = X.cols();
    if (y.size() != n) throw DataError("fit: outcome length does not match design rows");
    if (n <= cols) {
        throw DataError("fit: need more subjects (" + std::to_string(n) + ") than coefficients (" +
                        std::to_string(cols) + ")");
    }
    if (!y.allFinite()) throw DataError("fit: non-finite outcome");

    SofrFit fit;
    fit.family = family;
    fit.basis = design.basis;
    Eigen::VectorXd coef;
    if (family == Family::gaussian) {
        coef = glm::least_squares(X, y);
        const Eigen::VectorXd resid = y - X * coef;
        fit.dispersion = resid.squaredNorm() / static_cast<double>(n - cols);
        fit.converged = true;
        fit.iterations = 1;
        fit.max_abs_score = (X.transpose() * resid).cwiseAbs().maxCoeff();
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (y[i] != 0.0 && y[i] != 1.0) {
                throw DataError("fit: bernoulli outcome must be 0 or 1 (row " + std::to_string(i + 1) + ")");
            }
        }
        glm::LogisticOptions lo;
        lo.max_iterations = options.max_iterations;
        lo.score_tolerance = options.score_tolerance;
        lo.prob_clamp = options.prob_clamp;
        const glm::LogisticFit lf = glm::fit_logistic(X, y, {}, lo);
        coef = lf.coef;
        fit.converged = lf.converged;
        fit.iterations = lf.iterations;
        fit.max_abs_score = lf.max_abs_score;
        fit.dispersion = 1.0;
        const Eigen::VectorXd eta = X * coef;
        const double bound = logit(1.0 - options.prob_clamp);
        fit.separated = !coef.allFinite() || eta.cwiseAbs().maxCoeff() >= bound;
        if (!fit.converged && !fit.separated) {
            throw NumericalError("logistic fit did not converge in " + std::to_string(lf.iterations) +
                                 " iterations (max |score| " + std::to_string(lf.max_abs_score) + ")");
        }
    }
    fit.c = coef.head(design.n_basis);
    fit.gamma_hat = coef.tail(cols - design.n_basis);
    return fit;
}

Eigen::VectorXd reconstruct_beta(const Eigen::VectorXd& c, const BasisSpec& basis, const grid::TimeGrid& grid) {
    const Eigen::MatrixXd B = basis_eval(basis, grid);
    if (c.size() != B.rows()) throw std::invalid_argument("reconstruct_beta: coefficient count does not match basis");
    return B.transpose() * c;
}

Eigen::VectorXd reconstruct_beta(const SofrFit& fit, const grid::TimeGrid& grid) {
    return reconstruct_beta(fit.c, fit.basis, grid);
}

SofrFit fit_sofr(const Dataset& data, const Eigen::MatrixXd& x_hat, const BasisSpec& spec, Family family) {
    const Design d = build_design(x_hat, data.covariates(), spec, data.grid, data.covariate_names);
    return fit_glm(d, data.outcomes(), family);
}

}  // namespace zisofr::sofr
