#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "zisofr/numerics.hpp"

using namespace zisofr;

TEST_CASE("normal quantile inverts the cdf") {
    for (double p : {1e-12, 1e-6, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.97575, 0.999, 1 - 1e-9}) {
        const double x = normal_quantile(p);
        CHECK(normal_cdf(x) == doctest::Approx(p).epsilon(1e-9));
    }
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(std::isinf(normal_quantile(0.0)));
    CHECK(std::isinf(normal_quantile(1.0)));
    CHECK_THROWS(normal_quantile(1.5));
}

TEST_CASE("logistic and logit") {
    CHECK(logistic(0.0) == 0.5);
    CHECK(logistic(1.0) == doctest::Approx(0.7310585786300049));
    CHECK(logistic(-800.0) >= 0.0);
    CHECK(logistic(800.0) <= 1.0);
    CHECK(logit(0.7) == doctest::Approx(0.8472978603872037));
}

TEST_CASE("Gauss-Hermite rule integrates polynomials against exp(-x^2)") {
    const auto& rule = gauss_hermite_64();
    REQUIRE(rule.nodes.size() == 64);
    double w0 = 0, w2 = 0, w4 = 0, w1 = 0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double x = rule.nodes[k];
        w0 += rule.weights[k];
        w1 += rule.weights[k] * x;
        w2 += rule.weights[k] * x * x;
        w4 += rule.weights[k] * x * x * x * x;
        CHECK(std::exp(rule.log_weights[k]) == doctest::Approx(rule.weights[k]).epsilon(1e-10));
    }
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    CHECK(w0 == doctest::Approx(sqrt_pi).epsilon(1e-13));
    CHECK(std::abs(w1) < 1e-13);
    CHECK(w2 == doctest::Approx(sqrt_pi / 2).epsilon(1e-13));
    CHECK(w4 == doctest::Approx(3 * sqrt_pi / 4).epsilon(1e-12));

    const auto small = gauss_hermite(5);
    double s = 0;
    for (double w : small.weights) s += w;
    CHECK(s == doctest::Approx(sqrt_pi).epsilon(1e-13));
}

TEST_CASE("golden section finds interior and boundary minima") {
    auto inner = golden_section_minimize([](double x) { return (x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-10);
    CHECK(inner.argmin == doctest::Approx(0.3).epsilon(1e-8));
    auto edge = golden_section_minimize([](double x) { return x; }, 0.0, 1.0, 1e-10);
    CHECK(edge.argmin == 0.0);
}

TEST_CASE("type-7 quantile") {
    const std::vector<double> v{4, 1, 3, 2};
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK(quantile(v, 0.5) == 2.5);
    CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
    CHECK_THROWS(quantile(std::vector<double>{}, 0.5));
}

TEST_CASE("seed derivation separates streams and is reproducible") {
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(1, 3, 0) != derive_seed(1, 3, 1));
    Rng a = make_rng(9, 4);
    Rng b = make_rng(9, 4);
    CHECK(standard_normal_vector(a, 5) == standard_normal_vector(b, 5));
}
