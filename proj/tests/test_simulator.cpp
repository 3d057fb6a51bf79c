#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "zisofr/errors.hpp"
#include "zisofr/simulator.hpp"

using namespace zisofr;
using namespace zisofr::sim;

TEST_CASE("theta component stays inside (a, a + d)") {
    const auto g = grid::TimeGrid::uniform(24);
    Rng rng = make_rng(5, 0);
    for (int r = 0; r < 50; ++r) {
        const auto v = gen_theta_component(0.3, 0.2, g, rng);
        CHECK(v.minCoeff() > 0.3);
        CHECK(v.maxCoeff() < 0.5);
    }
    const auto tiny = gen_theta_component(0.3, 1e-9, g, rng);
    CHECK((tiny.array() - 0.3).abs().maxCoeff() < 1e-9);
}

TEST_CASE("theta component is uniform on (a, a + d) at a fixed point") {
    const auto g = grid::TimeGrid::uniform(3);
    const int draws = 10000;
    std::vector<double> u;
    for (int r = 0; r < draws; ++r) {
        Rng rng = make_rng(77, static_cast<std::uint64_t>(r));
        const auto v = gen_theta_component(-0.4, 0.8, g, rng);
        u.push_back((v[1] + 0.4) / 0.8);
    }
    std::sort(u.begin(), u.end());
    double ks = 0.0;
    for (int k = 0; k < draws; ++k) {
        ks = std::max(ks, std::max(std::abs(u[k] - static_cast<double>(k) / draws),
                                   std::abs(u[k] - static_cast<double>(k + 1) / draws)));
    }
    CHECK(ks < 0.02);
}

TEST_CASE("activation probability") {
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(3, 5);
    Eigen::VectorXd z(2);
    z << 1.3, 1.0;
    CHECK((activation_prob(theta, z).array() - 0.5).abs().maxCoeff() == 0.0);
    theta.row(0).setOnes();
    CHECK(activation_prob(theta, z)[2] == doctest::Approx(0.7310585786300049).epsilon(1e-12));
    theta.setZero();
    theta.row(1).setConstant(0.7);
    Eigen::VectorXd zn = z;
    zn[0] = -z[0];
    CHECK((activation_prob(theta, z) + activation_prob(theta, zn)).isApprox(Eigen::VectorXd::Ones(5)));
}

TEST_CASE("threshold process moments") {
    const auto g = grid::TimeGrid::uniform(3);
    const grid::GaussianSampler proc(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3));
    const int draws = 100000;
    double s1 = 0, s11 = 0, s12 = 0, s2 = 0, s22 = 0;
    for (int r = 0; r < draws; ++r) {
        Rng rng = make_rng(21, static_cast<std::uint64_t>(r));
        const auto G = gen_G_subject(0.4, proc, 2, rng);
        const double a = G(0, 1), b = G(1, 1);
        s1 += a;
        s2 += b;
        s11 += a * a;
        s22 += b * b;
        s12 += a * b;
    }
    const double m1 = s1 / draws, m2 = s2 / draws;
    const double v1 = s11 / draws - m1 * m1, v2 = s22 / draws - m2 * m2;
    CHECK(std::abs(v1 - 1.0) < 0.05);
    const double corr = (s12 / draws - m1 * m2) / std::sqrt(v1 * v2);
    CHECK(std::abs(corr - 0.16) < 0.02);

    Rng rng = make_rng(1, 0);
    const auto all = gen_G(0.0, g, 4, 3, rng);
    CHECK(all.size() == 4);
    CHECK(all[0].rows() == 3);
    CHECK(all[0].cols() == 3);
}

TEST_CASE("proxy construction") {
    Eigen::VectorXd x(3), p(3);
    x << 4.0, 5.0, 3.0;
    p << 0.999, 0.999, 0.5;
    Eigen::MatrixXd g(2, 3), u = Eigen::MatrixXd::Zero(2, 3);
    g << -20, -20, 10, -20, -20, -20;
    const auto w = gen_W(x, p, g, u);
    CHECK(w(0, 0) == doctest::Approx(4.0 / 0.999));
    CHECK(w(0, 2) == 0.0);
    CHECK(w(1, 2) == doctest::Approx(6.0));
}

TEST_CASE("proxy is unbiased for the latent value") {
    const int reps = 100000;
    Eigen::VectorXd x(2), p(2);
    x << 4.0, 2.5;
    p << 0.6, 0.35;
    Rng rng = make_rng(8, 0);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd g(reps, 2), u(reps, 2);
    for (int r = 0; r < reps; ++r) {
        for (int t = 0; t < 2; ++t) {
            g(r, t) = normal(rng);
            u(r, t) = normal(rng);
        }
    }
    const auto w = gen_W(x, p, g, u);
    for (int t = 0; t < 2; ++t) {
        const double mean = w.col(t).mean();
        const double sd = std::sqrt((w.col(t).array() - mean).square().sum() / (reps - 1));
        CHECK(std::abs(mean - x[t]) < 4 * sd / std::sqrt(reps));
        double ss = 0;
        int count = 0;
        for (int r = 0; r < reps; ++r) {
            const bool on = g(r, t) < normal_quantile(p[t]);
            CHECK_EQ(w(r, t) != 0.0, on);
            if (on) {
                ss += std::pow(w(r, t) - x[t] / p[t], 2);
                ++count;
            }
        }
        CHECK(std::abs(ss / count - 1.0) < 0.03);
    }
}

TEST_CASE("outcome generation") {
    SimConfig c;
    c.sigma0_sq = 0.0;
    c.beta_true = [](double) { return 0.0; };
    Eigen::VectorXd x = Eigen::VectorXd::Ones(24);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(2);
    Rng rng = make_rng(1, 0);
    CHECK(gen_Y(x, z, c, rng) == 5.0);

    SimConfig s;
    CHECK(std::abs(linear_predictor(x, z, s) - 5.0) < 0.05);

    SimConfig b;
    b.family = Family::bernoulli;
    b.gamma.setZero();
    b.beta_true = [](double) { return 0.0; };
    int ones = 0;
    const int draws = 20000;
    for (int r = 0; r < draws; ++r) ones += gen_Y(x, z, b, rng) == 1.0 ? 1 : 0;
    CHECK(std::abs(ones / static_cast<double>(draws) - 0.5) < 0.015);
}

namespace {

double zero_fraction(double offset) {
    double zeros = 0, total = 0;
    for (int s = 0; s < 20; ++s) {
        SimConfig c;
        c.n = 200;
        c.seed = 1000 + static_cast<std::uint64_t>(s);
        c.theta[0].offset = offset;
        const auto sim = simulate_dataset(c);
        for (const auto& rec : sim.data.subjects) {
            zeros += (rec.w.array() == 0.0).count();
            total += static_cast<double>(rec.w.size());
        }
    }
    return zeros / total;
}

}  // namespace

TEST_CASE("zero fractions of the default settings") {
    CHECK(std::abs(zero_fraction(0.6) - 0.335) < 0.02);
    CHECK(std::abs(zero_fraction(0.3) - 0.403) < 0.02);
}

TEST_CASE("simulation is deterministic and shaped correctly") {
    SimConfig c;
    c.n = 12;
    c.seed = 99;
    const auto a = simulate_dataset(c);
    const auto b = simulate_dataset(c);
    CHECK(content_hash(a.data) == content_hash(b.data));
    CHECK(a.truth.x == b.truth.x);
    CHECK(a.data.n() == 12);
    CHECK(a.data.subjects[3].w.rows() == 7);
    CHECK(a.data.subjects[3].w.cols() == 24);
    CHECK(a.truth.p.minCoeff() > 0.0);
    CHECK(a.truth.p.maxCoeff() < 1.0);
    for (int i = 0; i < c.n; ++i) {
        const auto& rec = a.data.subjects[static_cast<std::size_t>(i)];
        for (int j = 0; j < 7; ++j) {
            for (int t = 0; t < 24; ++t) {
                const bool off = a.truth.g[static_cast<std::size_t>(i)](j, t) >= normal_quantile(a.truth.p(i, t));
                CHECK_EQ(rec.w(j, t) == 0.0, off);
            }
        }
    }
    c.seed = 100;
    CHECK(content_hash(simulate_dataset(c).data) != content_hash(a.data));
}

TEST_CASE("config validation") {
    SimConfig c;
    c.q_g = 1.0;
    CHECK_THROWS_AS(c.validate(), ParameterDomainError);
    c.q_g = 0.2;
    c.J = 1;
    CHECK_THROWS_AS(c.validate(), ParameterDomainError);
    c.J = 7;
    c.sigma_u = 0;
    CHECK_THROWS_AS(c.validate(), ParameterDomainError);
}
