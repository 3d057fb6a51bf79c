#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "zisofr/dataset.hpp"
#include "zisofr/grid_kernels.hpp"
#include "zisofr/numerics.hpp"

namespace zisofr::sim {

// theta component a + d * Phi(v(t)), v a standard stationary GP.
struct ThetaComponent {
    double offset;  // a
    double width;   // d
};

// Theta-intercept offsets and the zero proportions they produce in W.
inline constexpr std::array<double, 4> kThetaInterceptOffsets = {1.0, 0.8, 0.6, 0.3};
inline constexpr std::array<double, 4> kExpectedZeroProportions = {0.255, 0.294, 0.335, 0.403};

struct SimConfig {
    int n = 100;
    int J = 7;
    grid::TimeGrid grid = grid::TimeGrid::uniform(grid::kDefaultGridSize);
    // (intercept, Z_c slope, Z_b slope)
    Eigen::Vector3d gamma{5.0, 0.2, 0.4};
    double sigma_c_sq = 1.0;
    double p_b = 0.6;
    // theta_0, theta_c, theta_b
    std::array<ThetaComponent, 3> theta{{{0.6, 0.2}, {-0.4, 0.8}, {-0.5, 1.0}}};
    double sigma_u = 1.0;
    grid::Kernel u_kernel{grid::KernelFamily::squared_exponential, 0.2};
    double q_g = 0.0;
    Family family = Family::gaussian;
    double sigma0_sq = 0.02;
    std::function<double(double)> beta_true = [](double t) { return std::sin(2.0 * std::numbers::pi * t); };
    std::uint64_t seed = 1;

    void validate() const;
    [[nodiscard]] Eigen::VectorXd beta_on_grid() const;
};

struct SimulatedTruth {
    Eigen::MatrixXd x;                  // n x m latent curves
    Eigen::MatrixXd p;                  // n x m activation probabilities
    Eigen::MatrixXd theta;              // 3 x m
    std::vector<Eigen::MatrixXd> g;     // per subject, J x m threshold process
};

struct Simulation {
    Dataset data;
    SimulatedTruth truth;
};

// Mean and covariance of the latent X process.
double latent_mean(double t);
double latent_sd(double t);
Eigen::MatrixXd latent_covariance(const grid::TimeGrid& grid);

Eigen::VectorXd gen_theta_component(double offset, double width, const grid::TimeGrid& grid,
                                    Rng& rng);

// logistic((1, z^T) theta(t)) at every grid point; theta is (p+1) x m.
Eigen::VectorXd activation_prob(const Eigen::MatrixXd& theta, const Eigen::VectorXd& z);

// G_ij = q_g G0_i + sqrt(1 - q_g^2) G1_ij for one subject; returns J x m.
Eigen::MatrixXd gen_G_subject(double q_g, const grid::GaussianSampler& process, int J, Rng& rng);

// n subjects, each J x m.
std::vector<Eigen::MatrixXd> gen_G(double q_g, const grid::TimeGrid& grid, int n, int J, Rng& rng);

// W_ij(t) = 1[G_ij(t) < Phi^-1(p(t))] (x(t)/p(t) + U_ij(t)); zeros are exact.
Eigen::MatrixXd gen_W(const Eigen::VectorXd& x, const Eigen::VectorXd& p, const Eigen::MatrixXd& g,
                      const Eigen::MatrixXd& u);

// Linear predictor  \int beta x + (1, z^T) gamma  by Riemann sum on the grid.
double linear_predictor(const Eigen::VectorXd& x, const Eigen::VectorXd& z, const SimConfig& config);

double gen_Y(const Eigen::VectorXd& x, const Eigen::VectorXd& z, const SimConfig& config, Rng& rng);

Simulation simulate_dataset(const SimConfig& config);

}  // namespace zisofr::sim
