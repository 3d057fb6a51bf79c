#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "zisofr/activation.hpp"
#include "zisofr/calibration.hpp"
#include "zisofr/dataset.hpp"
#include "zisofr/mixed_model.hpp"

namespace zisofr::recovery {

// Strategies for predicting the latent curves X_i(t) from the proxies.
enum class Method {
    benchmark,  // true X (simulation only)
    mm,         // zero-inflated pointwise mixed model
    rc,         // pointwise regression calibration
    average,    // replicate mean including zeros
    nonzi_mm,   // pointwise mixed model ignoring zero inflation
    one_day,    // first replicate
};

inline constexpr Method kAllMethods[] = {Method::benchmark, Method::mm,       Method::rc,
                                         Method::average,   Method::nonzi_mm, Method::one_day};

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct Diagnostic {
    int t = -1;
    int subject = -1;
    std::string message;
};

struct RecoveryResult {
    Eigen::MatrixXd x_hat;  // n x m
    Method method = Method::average;
    std::optional<ActivationEstimate> activation;
    std::vector<Diagnostic> diagnostics;
};

RecoveryResult recover_benchmark(const Eigen::MatrixXd& true_x);

// Per time point: fit the random-intercept model to p_hat_i(t) W_ij(t) over
// nonzero W, predict b0 + b_i. Subjects without a nonzero replicate at t get
// b0 and a diagnostic.
RecoveryResult recover_mm(const Dataset& data, const ActivationEstimate& activation);

// Same model on all replicates (zeros included) with p_hat = 1.
RecoveryResult recover_mm_nonzi(const Dataset& data);

RecoveryResult recover_rc(const Dataset& data, const ActivationEstimate& activation);

RecoveryResult recover_naive_average(const Dataset& data);

RecoveryResult recover_one_day(const Dataset& data);

struct RecoveryOptions {
    ActivationMethod activation = ActivationMethod::logistic_pointwise;
};

// Dispatches on method; `true_x` is required for the benchmark only.
RecoveryResult recover(Method method, const Dataset& data, const RecoveryOptions& options = {},
                       const Eigen::MatrixXd* true_x = nullptr);

}  // namespace zisofr::recovery
