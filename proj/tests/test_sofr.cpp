#include <doctest.h>

#include <cmath>
#include <numbers>

#include "zisofr/errors.hpp"
#include "zisofr/numerics.hpp"
#include "zisofr/sofr.hpp"

using namespace zisofr;
using namespace zisofr::sofr;

TEST_CASE("Fourier basis layout") {
    const auto g = grid::TimeGrid::uniform(24);
    const auto B = basis_eval({BasisFamily::fourier, 5}, g);
    CHECK(B.rows() == 5);
    CHECK((B.row(0).array() - 1.0).abs().maxCoeff() == 0.0);
    CHECK(B(1, 6) == doctest::Approx(std::sqrt(2.0) * std::sin(2 * std::numbers::pi * g[6])));
    CHECK(B(2, 6) == doctest::Approx(std::sqrt(2.0) * std::cos(2 * std::numbers::pi * g[6])));
    CHECK(B(4, 6) == doctest::Approx(std::sqrt(2.0) * std::cos(4 * std::numbers::pi * g[6])));
    // Riemann Gram matrix is the identity up to O(1/m).
    const Eigen::MatrixXd gram = B * B.transpose() / 24.0;
    CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 2.0 / 24);
}

TEST_CASE("B-spline partition of unity and knots") {
    CHECK(interior_knots(7) == std::vector<double>{0.25, 0.5, 0.75});
    CHECK(interior_knots(4).empty());
    Eigen::VectorXd pts = Eigen::VectorXd::LinSpaced(1001, 0.0, 1.0);
    for (int K : {4, 5, 7, 10}) {
        const auto B = basis_eval({BasisFamily::bspline_cubic, K}, pts);
        CHECK(B.rows() == K);
        CHECK((B.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK(B.minCoeff() >= 0.0);
    }
    const auto B = basis_eval({BasisFamily::bspline_cubic, 7}, pts);
    CHECK(B(0, 0) == 1.0);
    CHECK(B(6, 1000) == doctest::Approx(1.0));
    CHECK_THROWS_AS(basis_eval({BasisFamily::bspline_cubic, 3}, pts), ParameterDomainError);
    CHECK_THROWS_AS(basis_eval({BasisFamily::fourier, 0}, pts), ParameterDomainError);
}

TEST_CASE("Riemann integration") {
    const auto g = grid::TimeGrid::uniform(24);
    CHECK(riemann_integrate(Eigen::VectorXd::Ones(24), g) == 1.0);
    CHECK(riemann_integrate(g.as_vector(), g) == doctest::Approx(0.5).epsilon(1e-15));
    Eigen::VectorXd s(24);
    for (int k = 0; k < 24; ++k) s[k] = std::sin(2 * std::numbers::pi * g[k]);
    CHECK(std::abs(riemann_integrate(s, g)) <= 0.05);
    CHECK_THROWS(riemann_integrate(Eigen::VectorXd::Ones(3), g));
}

TEST_CASE("design matrix") {
    const auto g = grid::TimeGrid::uniform(24);
    const BasisSpec fourier{BasisFamily::fourier, 5};
    CHECK(functional_scores(Eigen::MatrixXd::Zero(3, 24), fourier, g).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd ones_scores = functional_scores(Eigen::MatrixXd::Ones(3, 24), fourier, g);
    CHECK(ones_scores(0, 0) == doctest::Approx(1.0));
    CHECK(ones_scores.rightCols(4).cwiseAbs().maxCoeff() < 2.0 / 24);
    CHECK_THROWS_AS(build_design(Eigen::MatrixXd::Zero(3, 24), Eigen::MatrixXd::Zero(3, 0), fourier, g),
                    CollinearityError);

    Eigen::MatrixXd z(6, 1);
    z << 0.1, 0.5, -1.0, 2.0, 0.3, -0.7;
    const auto named = build_design(Eigen::MatrixXd::Random(6, 24), z, {BasisFamily::fourier, 3}, g, {"age"});
    CHECK(named.column_names[3] == "intercept");
    CHECK(named.column_names[4] == "age");

    Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 24);
    const auto single = build_design(x, Eigen::MatrixXd::Zero(4, 0), {BasisFamily::fourier, 1}, g);
    for (int i = 0; i < 4; ++i) CHECK(single.matrix(i, 0) == doctest::Approx(x.row(i).mean()));
}

TEST_CASE("rank-deficient design names the offending columns") {
    const auto g = grid::TimeGrid::uniform(24);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 24);
    Eigen::MatrixXd z(10, 2);
    z.col(0).setRandom();
    z.col(1) = 3.0 * z.col(0);
    try {
        build_design(x, z, kDefaultBSpline, g, {"age", "age3"});
        FAIL("expected CollinearityError");
    } catch (const CollinearityError& e) {
        const std::string msg = e.what();
        CHECK((msg.find("age3") != std::string::npos || msg.find("age") != std::string::npos));
    }
}

TEST_CASE("Gaussian fit equals the normal-equations solution") {
    Rng rng = make_rng(3, 0);
    std::normal_distribution<double> normal;
    const int n = 60;
    Design d;
    d.n_basis = 0;
    d.basis = {BasisFamily::fourier, 1};
    d.matrix.resize(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        d.matrix(i, 0) = 1.0;
        d.matrix(i, 1) = normal(rng);
        d.matrix(i, 2) = normal(rng) > 0 ? 1.0 : 0.0;
        y[i] = 5 + 0.2 * d.matrix(i, 1) + 0.4 * d.matrix(i, 2) + 0.1 * normal(rng);
    }
    const auto fit = fit_glm(d, y, Family::gaussian);
    const Eigen::MatrixXd XtX = d.matrix.transpose() * d.matrix;
    const Eigen::VectorXd direct = XtX.ldlt().solve(d.matrix.transpose() * y);
    CHECK((fit.gamma_hat - direct).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::VectorXd resid = y - d.matrix * fit.coefficients();
    CHECK(fit.dispersion == doctest::Approx(resid.squaredNorm() / (n - 3)));
}

TEST_CASE("noiseless outcome identifies the scalar coefficients") {
    const auto g = grid::TimeGrid::uniform(24);
    Rng rng = make_rng(5, 0);
    std::normal_distribution<double> normal;
    const int n = 50;
    Eigen::MatrixXd x(n, 24), z(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int t = 0; t < 24; ++t) x(i, t) = normal(rng);
        z(i, 0) = normal(rng);
        z(i, 1) = normal(rng) > 0 ? 1.0 : 0.0;
        y[i] = 5 + 0.2 * z(i, 0) + 0.4 * z(i, 1);
    }
    const auto fit = fit_glm(build_design(x, z, kDefaultBSpline, g), y, Family::gaussian);
    CHECK(std::abs(fit.gamma_hat[0] - 5) < 1e-6);
    CHECK(std::abs(fit.gamma_hat[1] - 0.2) < 1e-6);
    CHECK(std::abs(fit.gamma_hat[2] - 0.4) < 1e-6);
    CHECK(fit.c.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("intercept-only logistic equals the logit of the sample proportion") {
    const int n = 40;
    Design d;
    d.n_basis = 0;
    d.basis = {BasisFamily::fourier, 1};
    d.matrix = Eigen::MatrixXd::Ones(n, 1);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < 13; ++i) y[i] = 1.0;
    const auto fit = fit_glm(d, y, Family::bernoulli);
    CHECK(fit.converged);
    CHECK(std::abs(fit.gamma_hat[0] - std::log(13.0 / 27.0)) < 1e-8);
    y[0] = 0.5;
    CHECK_THROWS_AS(fit_glm(d, y, Family::bernoulli), DataError);
}

TEST_CASE("separated Bernoulli data is flagged") {
    const int n = 30;
    Design d;
    d.n_basis = 0;
    d.basis = {BasisFamily::fourier, 1};
    d.matrix.resize(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        d.matrix(i, 0) = 1.0;
        d.matrix(i, 1) = i - 14.5;
        y[i] = i >= 15 ? 1.0 : 0.0;
    }
    const auto fit = fit_glm(d, y, Family::bernoulli);
    CHECK(fit.separated);
}

TEST_CASE("too few subjects") {
    Design d;
    d.n_basis = 0;
    d.matrix = Eigen::MatrixXd::Ones(2, 2);
    CHECK_THROWS_AS(fit_glm(d, Eigen::VectorXd::Ones(2), Family::gaussian), DataError);
}

TEST_CASE("beta reconstruction") {
    const auto g = grid::TimeGrid::uniform(24);
    const BasisSpec fourier{BasisFamily::fourier, 5};
    Eigen::VectorXd c = Eigen::VectorXd::Zero(5);
    CHECK(reconstruct_beta(c, fourier, g).cwiseAbs().maxCoeff() == 0.0);
    c[0] = 1.0;
    CHECK((reconstruct_beta(c, fourier, g).array() - 1.0).abs().maxCoeff() < 1e-15);

    // sin(2 pi t) lies in the span: projection then reconstruction is exact.
    Eigen::VectorXd s(24);
    for (int k = 0; k < 24; ++k) s[k] = std::sin(2 * std::numbers::pi * g[k]);
    const Eigen::MatrixXd B = basis_eval(fourier, g);
    const Eigen::VectorXd proj = (B * B.transpose()).ldlt().solve(B * s);
    CHECK(std::abs(proj[1] - 1.0 / std::sqrt(2.0)) < 1e-10);
    CHECK(std::sqrt(riemann_integrate((reconstruct_beta(proj, fourier, g) - s).cwiseAbs2(), g)) < 1e-10);
}
