#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace zisofr {

using Rng = std::mt19937_64;

// Derives an independent seed for a numbered substream of a master seed
// (splitmix64 mixing of the master seed and the stream coordinates).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t substream = 0);

inline Rng make_rng(std::uint64_t master, std::uint64_t stream, std::uint64_t substream = 0) {
    return Rng{derive_seed(master, stream, substream)};
}

Eigen::VectorXd standard_normal_vector(Rng& rng, Eigen::Index n);

double normal_cdf(double x);
double normal_pdf(double x);

// Inverse of the standard normal CDF. Rational approximation refined by one
// Halley step; absolute error below 1e-9 on (0, 1).
double normal_quantile(double p);

inline double logistic(double eta) {
    if (eta >= 0.0) {
        return 1.0 / (1.0 + std::exp(-eta));
    }
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Nodes and weights for  \int f(x) exp(-x^2) dx ~= sum_k w_k f(x_k).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> log_weights;
};

GaussHermiteRule gauss_hermite(int order);

// Cached 64-node rule.
const GaussHermiteRule& gauss_hermite_64();

struct ScalarMinimum {
    double argmin;
    double value;
};

// Golden-section search for a minimum of f on [lo, hi], stopping when the
// bracket is narrower than tol.
ScalarMinimum golden_section_minimize(const std::function<double(double)>& f, double lo,
                                      double hi, double tol);

// Sample quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7). Sorts a copy of the data.
double quantile(std::span<const double> values, double prob);

}  // namespace zisofr
