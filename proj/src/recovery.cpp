#include "zisofr/recovery.hpp"

#include <sstream>

#include "zisofr/errors.hpp"

namespace zisofr::recovery {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::benchmark: return "benchmark";
        case Method::mm: return "mm";
        case Method::rc: return "rc";
        case Method::average: return "average";
        case Method::nonzi_mm: return "nonzi_mm";
        case Method::one_day: return "one_day";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (Method m : kAllMethods) {
        if (name == to_string(m)) return m;
    }
    throw ParameterDomainError("unknown method '" + std::string(name) +
                               "' (expected benchmark, mm, rc, average, nonzi_mm or one_day)");
}

namespace {

// Runs the pointwise mixed model with per-subject groups produced by `collect`.
template <typename Collect>
RecoveryResult pointwise_mixed_model(const Dataset& data, Method method, Collect collect) {
    const int n = data.n();
    const int m = data.m();
    RecoveryResult out;
    out.method = method;
    out.x_hat.resize(n, m);
    std::vector<std::vector<double>> groups(static_cast<std::size_t>(n));
    for (int t = 0; t < m; ++t) {
        for (int i = 0; i < n; ++i) {
            auto& g = groups[static_cast<std::size_t>(i)];
            g.clear();
            collect(i, t, g);
        }
        MixedModelFit fit;
        try {
            fit = fit_pointwise_mm(groups);
        } catch (const NumericalError& e) {
            std::ostringstream msg;
            msg << to_string(method) << ": time index " << t << ": " << e.what();
            throw NumericalError(msg.str());
        }
        if (fit.boundary) {
            out.diagnostics.push_back({t, -1, "random-intercept variance truncated at 0"});
        }
        for (int i = 0; i < n; ++i) {
            if (fit.group_sizes[i] == 0) {
                out.diagnostics.push_back({t, i, "no nonzero replicate; predicted by the fixed intercept"});
            }
            out.x_hat(i, t) = fit.b0 + fit.blup[i];
        }
    }
    return out;
}

}  // namespace

RecoveryResult recover_benchmark(const Eigen::MatrixXd& true_x) {
    RecoveryResult out;
    out.method = Method::benchmark;
    out.x_hat = true_x;
    return out;
}

RecoveryResult recover_mm(const Dataset& data, const ActivationEstimate& activation) {
    if (activation.p_hat.rows() != data.n() || activation.p_hat.cols() != data.m()) {
        throw std::invalid_argument("recover_mm: activation does not match dataset");
    }
    RecoveryResult out = pointwise_mixed_model(data, Method::mm, [&](int i, int t, std::vector<double>& g) {
        const auto& w = data.subjects[static_cast<std::size_t>(i)].w;
        const double p = activation.p_hat(i, t);
        for (Eigen::Index j = 0; j < w.rows(); ++j) {
            if (w(j, t) != 0.0) g.push_back(p * w(j, t));
        }
    });
    out.activation = activation;
    return out;
}

RecoveryResult recover_mm_nonzi(const Dataset& data) {
    return pointwise_mixed_model(data, Method::nonzi_mm, [&](int i, int t, std::vector<double>& g) {
        const auto& w = data.subjects[static_cast<std::size_t>(i)].w;
        for (Eigen::Index j = 0; j < w.rows(); ++j) g.push_back(w(j, t));
    });
}

RecoveryResult recover_rc(const Dataset& data, const ActivationEstimate& activation) {
    const MomentEstimates moments = estimate_moments(data, activation);
    RecoveryResult out;
    out.method = Method::rc;
    out.x_hat.resize(data.n(), data.m());
    std::vector<double> column;
    for (int t = 0; t < data.m(); ++t) {
        const PointMoments mom = moments.at(t);
        for (int i = 0; i < data.n(); ++i) {
            const auto& w = data.subjects[static_cast<std::size_t>(i)].w;
            column.assign(w.col(t).data(), w.col(t).data() + w.rows());
            try {
                out.x_hat(i, t) = rc_conditional_expectation(column, activation.p_hat(i, t), mom);
            } catch (const NumericalError& e) {
                std::ostringstream msg;
                msg << "rc: time index " << t << ", subject " << i << ": " << e.what();
                throw NumericalError(msg.str());
            }
        }
    }
    out.activation = activation;
    return out;
}

RecoveryResult recover_naive_average(const Dataset& data) {
    RecoveryResult out;
    out.method = Method::average;
    out.x_hat.resize(data.n(), data.m());
    for (int i = 0; i < data.n(); ++i) {
        out.x_hat.row(i) = data.subjects[static_cast<std::size_t>(i)].w.colwise().mean();
    }
    return out;
}

RecoveryResult recover_one_day(const Dataset& data) {
    RecoveryResult out;
    out.method = Method::one_day;
    out.x_hat.resize(data.n(), data.m());
    for (int i = 0; i < data.n(); ++i) {
        out.x_hat.row(i) = data.subjects[static_cast<std::size_t>(i)].w.row(0);
    }
    return out;
}

RecoveryResult recover(Method method, const Dataset& data, const RecoveryOptions& options,
                       const Eigen::MatrixXd* true_x) {
    switch (method) {
        case Method::benchmark:
            if (true_x == nullptr) {
                throw DataError("benchmark method requires the true latent curves");
            }
            if (true_x->rows() != data.n() || true_x->cols() != data.m()) {
                throw DataError("benchmark method: true curves do not match the dataset");
            }
            return recover_benchmark(*true_x);
        case Method::mm: return recover_mm(data, estimate_activation(data, options.activation));
        case Method::rc: return recover_rc(data, estimate_activation(data, options.activation));
        case Method::average: return recover_naive_average(data);
        case Method::nonzi_mm: return recover_mm_nonzi(data);
        case Method::one_day: return recover_one_day(data);
    }
    throw std::logic_error("recover: unhandled method");
}

}  // namespace zisofr::recovery
