#include "zisofr/simulator.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "zisofr/errors.hpp"

namespace zisofr::sim {

namespace {

constexpr double kPi = std::numbers::pi;

// Literal correlation kernels of the simulation design.
double theta_correlation(double s, double t) { return std::exp(-(s - t) * (s - t) / 0.45); }
double latent_correlation(double s, double t) { return std::exp(-25.0 * (s - t) * (s - t) / 2.0); }
double threshold_correlation(double s, double t) { return std::exp(-50.0 * (s - t) * (s - t)); }

// Substream layout under the master seed.
constexpr std::uint64_t kThetaStream = 0;
constexpr std::uint64_t kSubjectStreamBase = 1;

}  // namespace

void SimConfig::validate() const {
    std::ostringstream msg;
    if (n < 2) msg << "n must be >= 2; ";
    if (J < 2) msg << "J must be >= 2; ";
    if (!(q_g >= 0.0 && q_g < 1.0)) msg << "q_g=" << q_g << " outside [0, 1); ";
    if (!(sigma_u > 0.0)) msg << "sigma_u must be > 0; ";
    for (const auto& c : theta) {
        if (!(c.width > 0.0)) msg << "theta width d must be > 0; ";
    }
    if (!(sigma_c_sq >= 0.0)) msg << "sigma_c_sq must be >= 0; ";
    if (!(p_b >= 0.0 && p_b <= 1.0)) msg << "p_b outside [0, 1]; ";
    if (!(sigma0_sq >= 0.0)) msg << "sigma0_sq must be >= 0; ";
    if (!beta_true) msg << "beta_true unset; ";
    const std::string problems = msg.str();
    if (!problems.empty()) {
        throw ParameterDomainError("SimConfig: " + problems.substr(0, problems.size() - 2));
    }
}

Eigen::VectorXd SimConfig::beta_on_grid() const {
    Eigen::VectorXd beta(grid.size());
    for (int k = 0; k < grid.size(); ++k) beta[k] = beta_true(grid[k]);
    return beta;
}

double latent_mean(double t) { return 4.0 + std::sin(1.0 + 2.8 * kPi * t); }

double latent_sd(double t) { return std::sqrt(1.0 + 0.1 * std::cos(-1.0 + 2.8 * kPi * t)); }

Eigen::MatrixXd latent_covariance(const grid::TimeGrid& grid) {
    return grid::build_cov_matrix(latent_correlation, latent_sd, grid);
}

Eigen::VectorXd gen_theta_component(double offset, double width, const grid::TimeGrid& grid,
                                    Rng& rng) {
    const Eigen::MatrixXd cov =
        grid::build_cov_matrix(theta_correlation, [](double) { return 1.0; }, grid);
    const Eigen::VectorXd v = grid::sample_gp(Eigen::VectorXd::Zero(grid.size()), cov, rng);
    return v.unaryExpr([&](double x) { return offset + width * normal_cdf(x); });
}

Eigen::VectorXd activation_prob(const Eigen::MatrixXd& theta, const Eigen::VectorXd& z) {
    if (theta.rows() != z.size() + 1) {
        throw std::invalid_argument("activation_prob: theta must have p+1 rows for p covariates");
    }
    Eigen::VectorXd design(z.size() + 1);
    design << 1.0, z;
    const Eigen::VectorXd eta = theta.transpose() * design;
    return eta.unaryExpr([](double e) { return logistic(e); });
}

Eigen::MatrixXd gen_G_subject(double q_g, const grid::GaussianSampler& process, int J, Rng& rng) {
    const Eigen::VectorXd shared = process.draw(rng);
    const double own = std::sqrt(1.0 - q_g * q_g);
    Eigen::MatrixXd g(J, process.dim());
    for (int j = 0; j < J; ++j) {
        g.row(j) = (q_g * shared + own * process.draw(rng)).transpose();
    }
    return g;
}

std::vector<Eigen::MatrixXd> gen_G(double q_g, const grid::TimeGrid& grid, int n, int J, Rng& rng) {
    if (!(q_g >= 0.0 && q_g < 1.0)) {
        throw ParameterDomainError("gen_G: q_g outside [0, 1)");
    }
    const grid::GaussianSampler process(
        Eigen::VectorXd::Zero(grid.size()),
        grid::build_cov_matrix(threshold_correlation, [](double) { return 1.0; }, grid));
    std::vector<Eigen::MatrixXd> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(gen_G_subject(q_g, process, J, rng));
    return out;
}

Eigen::MatrixXd gen_W(const Eigen::VectorXd& x, const Eigen::VectorXd& p, const Eigen::MatrixXd& g,
                      const Eigen::MatrixXd& u) {
    const Eigen::Index m = x.size();
    if (p.size() != m || g.cols() != m || u.cols() != m || g.rows() != u.rows()) {
        throw std::invalid_argument("gen_W: shapes are not conformable");
    }
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(g.rows(), m);
    for (Eigen::Index t = 0; t < m; ++t) {
        const double threshold = normal_quantile(p[t]);
        for (Eigen::Index j = 0; j < g.rows(); ++j) {
            if (g(j, t) < threshold) {
                w(j, t) = x[t] / p[t] + u(j, t);
            }
        }
    }
    return w;
}

double linear_predictor(const Eigen::VectorXd& x, const Eigen::VectorXd& z, const SimConfig& config) {
    const auto& grid = config.grid;
    double integral = 0.0;
    for (int k = 0; k < grid.size(); ++k) integral += config.beta_true(grid[k]) * x[k];
    integral *= grid.measure() / grid.size();
    if (config.gamma.size() != z.size() + 1) {
        throw std::invalid_argument("linear_predictor: gamma must have p+1 entries");
    }
    return integral + config.gamma[0] + config.gamma.tail(z.size()).dot(z);
}

double gen_Y(const Eigen::VectorXd& x, const Eigen::VectorXd& z, const SimConfig& config, Rng& rng) {
    const double eta = linear_predictor(x, z, config);
    if (config.family == Family::gaussian) {
        std::normal_distribution<double> noise(0.0, std::sqrt(config.sigma0_sq));
        return config.sigma0_sq > 0.0 ? eta + noise(rng) : eta;
    }
    std::bernoulli_distribution coin(logistic(eta));
    return coin(rng) ? 1.0 : 0.0;
}

Simulation simulate_dataset(const SimConfig& config) {
    config.validate();
    const auto& grid = config.grid;
    const int m = grid.size();
    const int n = config.n;
    const int J = config.J;

    Simulation sim;
    sim.data.grid = grid;
    sim.data.covariate_names = {"z_c", "z_b"};
    sim.data.subjects.resize(static_cast<std::size_t>(n));
    sim.truth.x.resize(n, m);
    sim.truth.p.resize(n, m);
    sim.truth.theta.resize(3, m);
    sim.truth.g.resize(static_cast<std::size_t>(n));

    Rng theta_rng = make_rng(config.seed, kThetaStream);
    for (int c = 0; c < 3; ++c) {
        sim.truth.theta.row(c) =
            gen_theta_component(config.theta[c].offset, config.theta[c].width, grid, theta_rng)
                .transpose();
    }

    Eigen::VectorXd x_mean(m);
    for (int k = 0; k < m; ++k) x_mean[k] = latent_mean(grid[k]);
    const grid::GaussianSampler x_process(x_mean, latent_covariance(grid));
    const grid::GaussianSampler g_process(
        Eigen::VectorXd::Zero(m),
        grid::build_cov_matrix(threshold_correlation, [](double) { return 1.0; }, grid));
    const double sigma_u = config.sigma_u;
    const grid::GaussianSampler u_process(
        Eigen::VectorXd::Zero(m),
        grid::build_cov_matrix(config.u_kernel, [sigma_u](double) { return sigma_u; }, grid));

    std::normal_distribution<double> zc_dist(0.0, std::sqrt(config.sigma_c_sq));
    std::bernoulli_distribution zb_dist(config.p_b);

    // Each subject draws from its own substream, so the result does not depend
    // on evaluation order.
    for (int i = 0; i < n; ++i) {
        Rng rng = make_rng(config.seed, kSubjectStreamBase + static_cast<std::uint64_t>(i));
        auto& rec = sim.data.subjects[static_cast<std::size_t>(i)];
        rec.id = std::to_string(i + 1);
        rec.z.resize(2);
        rec.z[0] = zc_dist(rng);
        rec.z[1] = zb_dist(rng) ? 1.0 : 0.0;

        const Eigen::VectorXd x = x_process.draw(rng);
        const Eigen::VectorXd p = activation_prob(sim.truth.theta, rec.z);
        Eigen::MatrixXd g = gen_G_subject(config.q_g, g_process, J, rng);
        Eigen::MatrixXd u(J, m);
        for (int j = 0; j < J; ++j) u.row(j) = u_process.draw(rng).transpose();

        rec.w = gen_W(x, p, g, u);
        rec.y = gen_Y(x, rec.z, config, rng);

        sim.truth.x.row(i) = x.transpose();
        sim.truth.p.row(i) = p.transpose();
        sim.truth.g[static_cast<std::size_t>(i)] = std::move(g);
    }
    return sim;
}

}  // namespace zisofr::sim
