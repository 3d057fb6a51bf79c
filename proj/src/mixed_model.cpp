#include "zisofr/mixed_model.hpp"

#include <cmath>
#include <numbers>

#include "zisofr/errors.hpp"
#include "zisofr/numerics.hpp"

namespace zisofr::recovery {

double MixedModelFit::shrinkage(int group) const {
    const double n_i = group_sizes[group];
    if (n_i == 0) return 0.0;
    const double denom = d2 * n_i + s2;
    return denom > 0.0 ? d2 * n_i / denom : 1.0;
}

namespace {

// Sufficient statistics of the grouped sample.
struct GroupStats {
    Eigen::VectorXd size;
    Eigen::VectorXd mean;
    double within_ss = 0.0;
    double total = 0.0;
};

GroupStats summarize(const std::vector<std::vector<double>>& groups) {
    GroupStats s;
    const auto g = static_cast<Eigen::Index>(groups.size());
    s.size = Eigen::VectorXd::Zero(g);
    s.mean = Eigen::VectorXd::Zero(g);
    for (Eigen::Index i = 0; i < g; ++i) {
        const auto& v = groups[static_cast<std::size_t>(i)];
        if (v.empty()) continue;
        double sum = 0.0;
        for (double x : v) sum += x;
        const double mean = sum / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        s.size[i] = static_cast<double>(v.size());
        s.mean[i] = mean;
        s.within_ss += ss;
        s.total += static_cast<double>(v.size());
    }
    return s;
}

struct Profile {
    double b0;
    double q;       // generalized residual sum of squares
    double log_det; // sum_i log(1 + n_i lambda)
    double dq;      // dQ/dlambda at the optimal b0
};

Profile profile_at(const GroupStats& s, double lambda) {
    double wsum = 0.0, wy = 0.0;
    for (Eigen::Index i = 0; i < s.size.size(); ++i) {
        if (s.size[i] == 0) continue;
        const double w = s.size[i] / (1.0 + s.size[i] * lambda);
        wsum += w;
        wy += w * s.mean[i];
    }
    Profile p{wy / wsum, s.within_ss, 0.0, 0.0};
    for (Eigen::Index i = 0; i < s.size.size(); ++i) {
        if (s.size[i] == 0) continue;
        const double denom = 1.0 + s.size[i] * lambda;
        const double dev = s.mean[i] - p.b0;
        p.q += s.size[i] / denom * dev * dev;
        p.dq -= s.size[i] * s.size[i] / (denom * denom) * dev * dev;
        p.log_det += std::log(denom);
    }
    return p;
}

double deviance(const GroupStats& s, double lambda) {
    const Profile p = profile_at(s, lambda);
    return s.total * std::log(p.q) + p.log_det;
}

double deviance_slope(const GroupStats& s, double lambda) {
    const Profile p = profile_at(s, lambda);
    double dlog_det = 0.0;
    for (Eigen::Index i = 0; i < s.size.size(); ++i) {
        if (s.size[i] == 0) continue;
        dlog_det += s.size[i] / (1.0 + s.size[i] * lambda);
    }
    return s.total * p.dq / p.q + dlog_det;
}

// Variance ratio maximizing the profiled likelihood on [0, kMaxVarianceRatio]:
// log-spaced scan, golden-section refinement inside the best bracket, then
// bisection on the analytic slope when the minimum is interior.
double optimal_ratio(const GroupStats& s) {
    std::vector<double> candidates{0.0};
    for (double e = -8.0; e <= std::log10(kMaxVarianceRatio) + 1e-9; e += 0.05) {
        candidates.push_back(std::pow(10.0, e));
    }
    candidates.back() = kMaxVarianceRatio;

    std::size_t best = 0;
    double best_value = deviance(s, candidates[0]);
    for (std::size_t k = 1; k < candidates.size(); ++k) {
        const double v = deviance(s, candidates[k]);
        if (v < best_value) {
            best_value = v;
            best = k;
        }
    }
    if (best == 0 && deviance_slope(s, 0.0) >= 0.0) return 0.0;

    const double lo = candidates[best == 0 ? 0 : best - 1];
    const double hi = candidates[std::min(best + 1, candidates.size() - 1)];
    const ScalarMinimum golden =
        golden_section_minimize([&](double l) { return deviance(s, l); }, lo, hi, 1e-10);
    double lambda = golden.argmin;
    if (lambda <= 0.0 || lambda >= kMaxVarianceRatio) return lambda;

    // Polish: bisection on the slope where it changes sign around the minimum.
    const double step = std::max(1e-9, 1e-6 * lambda);
    double a = std::max(0.0, lambda - step);
    double b = std::min(kMaxVarianceRatio, lambda + step);
    double fa = deviance_slope(s, a);
    const double fb = deviance_slope(s, b);
    if (fa < 0.0 && fb > 0.0) {
        for (int iter = 0; iter < 200 && b - a > 1e-15 * std::max(1.0, lambda); ++iter) {
            const double mid = 0.5 * (a + b);
            const double fm = deviance_slope(s, mid);
            if (fm < 0.0) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        lambda = 0.5 * (a + b);
    }
    return lambda;
}

}  // namespace

double profiled_deviance(const std::vector<std::vector<double>>& groups, double lambda) {
    return deviance(summarize(groups), lambda);
}

MixedModelFit fit_pointwise_mm(const std::vector<std::vector<double>>& groups) {
    const GroupStats s = summarize(groups);
    const auto g = static_cast<Eigen::Index>(groups.size());
    const auto nonempty = (s.size.array() >= 1.0).count();
    const auto repeated = (s.size.array() >= 2.0).count();
    if (nonempty < 2) {
        throw NumericalError("fit_pointwise_mm: fewer than 2 subjects with data; intercept variance unidentifiable");
    }
    if (repeated < 1) {
        throw NumericalError("fit_pointwise_mm: no subject with 2 or more values; variance components unidentifiable");
    }

    MixedModelFit fit;
    fit.group_sizes = s.size.cast<int>();
    fit.group_means = s.mean;
    fit.blup = Eigen::VectorXd::Zero(g);

    double between = 0.0;
    {
        const Profile p0 = profile_at(s, 0.0);
        between = p0.q - s.within_ss;
    }
    if (s.within_ss == 0.0 && between == 0.0) {
        // Every value identical: no variation to attribute to either component.
        fit.b0 = profile_at(s, 0.0).b0;
        fit.boundary = true;
        return fit;
    }

    const double lambda = optimal_ratio(s);
    const Profile p = profile_at(s, lambda);
    fit.b0 = p.b0;
    fit.s2 = p.q / s.total;
    fit.d2 = lambda * fit.s2;
    fit.boundary = lambda == 0.0;
    fit.log_likelihood = -0.5 * (s.total * std::log(2.0 * std::numbers::pi * fit.s2) + p.log_det + s.total);
    for (Eigen::Index i = 0; i < g; ++i) {
        if (s.size[i] == 0) continue;
        const double k = s.size[i] * lambda;
        fit.blup[i] = k / (1.0 + k) * (s.mean[i] - fit.b0);
    }
    return fit;
}

}  // namespace zisofr::recovery
