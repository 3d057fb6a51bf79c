#include "zisofr/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <optional>
#include <sstream>
#include <thread>

#include "zisofr/errors.hpp"
#include "zisofr/numerics.hpp"

namespace zisofr::analysis {

CurveMetrics compute_metrics(const std::vector<Eigen::VectorXd>& beta_hats, const Eigen::VectorXd& beta_true,
                             const grid::TimeGrid& grid) {
    const auto R = static_cast<int>(beta_hats.size());
    if (R < 2) throw std::invalid_argument("compute_metrics: need at least 2 replicates");
    const Eigen::Index m = beta_true.size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (const auto& b : beta_hats) {
        if (b.size() != m) throw std::invalid_argument("compute_metrics: curve length mismatch");
        mean += b;
    }
    mean /= R;
    Eigen::VectorXd spread = Eigen::VectorXd::Zero(m);
    for (const auto& b : beta_hats) spread += (b - mean).cwiseAbs2();
    spread /= (R - 1);
    const Eigen::VectorXd bias2 = (mean - beta_true).cwiseAbs2();
    return {sofr::riemann_integrate(bias2, grid), sofr::riemann_integrate(spread, grid)};
}

std::string_view to_string(Factor factor) {
    switch (factor) {
        case Factor::none: return "none";
        case Factor::n: return "n";
        case Factor::sigma_u: return "sigma_u";
        case Factor::kernel: return "kernel";
        case Factor::rho_u: return "rho_u";
        case Factor::zero_proportion: return "zero_proportion";
        case Factor::q_g: return "q_g";
        case Factor::family: return "family";
    }
    return "unknown";
}

Factor parse_factor(std::string_view name) {
    for (Factor f : {Factor::none, Factor::n, Factor::sigma_u, Factor::kernel, Factor::rho_u,
                     Factor::zero_proportion, Factor::q_g, Factor::family}) {
        if (name == to_string(f)) return f;
    }
    throw ParameterDomainError("unknown sweep factor '" + std::string(name) +
                               "' (expected none, n, sigma_u, kernel, rho_u, zero_proportion, q_g or family)");
}

namespace {

double parse_level_number(std::string_view factor, std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ParameterDomainError("sweep level '" + std::string(text) + "' for " + std::string(factor) +
                                   " is not a number");
    }
    return v;
}

}  // namespace

void apply_level(sim::SimConfig& config, Factor factor, std::string_view level) {
    const std::string_view name = to_string(factor);
    switch (factor) {
        case Factor::none: return;
        case Factor::n: {
            const double v = parse_level_number(name, level);
            if (v < 2 || v != std::floor(v)) throw ParameterDomainError("sweep level for n must be an integer >= 2");
            config.n = static_cast<int>(v);
            return;
        }
        case Factor::sigma_u: {
            const double v = parse_level_number(name, level);
            if (!(v > 0)) throw ParameterDomainError("sweep level for sigma_u must be > 0");
            config.sigma_u = v;
            return;
        }
        case Factor::rho_u:
            config.u_kernel = grid::Kernel(config.u_kernel.family(), parse_level_number(name, level));
            return;
        case Factor::kernel: {
            const auto colon = level.find(':');
            const grid::KernelFamily fam = grid::parse_kernel_family(level.substr(0, colon));
            double rho = config.u_kernel.rho();
            if (colon != std::string_view::npos) {
                rho = parse_level_number(name, level.substr(colon + 1));
            } else if (fam != config.u_kernel.family()) {
                throw ParameterDomainError("sweep level '" + std::string(level) +
                                           "' for kernel needs an explicit rho (family:rho)");
            }
            config.u_kernel = grid::Kernel(fam, rho);
            return;
        }
        case Factor::zero_proportion: {
            const double v = parse_level_number(name, level);
            for (std::size_t k = 0; k < sim::kExpectedZeroProportions.size(); ++k) {
                if (std::abs(v - sim::kExpectedZeroProportions[k]) < 1e-9) {
                    config.theta[0].offset = sim::kThetaInterceptOffsets[k];
                    return;
                }
            }
            throw ParameterDomainError("sweep level for zero_proportion must be one of 0.255, 0.294, 0.335, 0.403");
        }
        case Factor::q_g: {
            const double v = parse_level_number(name, level);
            if (!(v >= 0 && v < 1)) throw ParameterDomainError("sweep level for q_g must lie in [0, 1)");
            config.q_g = v;
            return;
        }
        case Factor::family: config.family = parse_family(level); return;
    }
}

void StudyConfig::validate() const {
    if (replicates < 2) throw ParameterDomainError("replicates must be >= 2");
    if (bases.empty()) throw ParameterDomainError("at least one basis is required");
    for (const auto& b : bases) b.validate();
    if (factor != Factor::none && levels.empty()) {
        throw ParameterDomainError("sweep factor " + std::string(to_string(factor)) + " needs at least one level");
    }
    if (!(max_failure_fraction >= 0 && max_failure_fraction < 1)) {
        throw ParameterDomainError("max_failure_fraction must lie in [0, 1)");
    }
    base.validate();
    for (const auto& level : levels) {
        sim::SimConfig c = base;
        apply_level(c, factor, level);
        c.validate();
    }
}

std::uint64_t replicate_seed(std::uint64_t master, int replicate) {
    return derive_seed(master, static_cast<std::uint64_t>(replicate));
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

template <typename Fn>
void parallel_for(int count, int threads, Fn fn) {
    const int workers = std::max(1, std::min(resolve_threads(threads), count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct ReplicateOutput {
    // [method][basis]
    std::vector<std::vector<std::optional<Eigen::VectorXd>>> curves;
    std::vector<std::uint64_t> hashes;
    std::vector<std::string> errors;
};

bool needs_activation(recovery::Method m) { return m == recovery::Method::mm || m == recovery::Method::rc; }

ReplicateOutput run_replicate(const sim::SimConfig& config, const StudyConfig& study) {
    ReplicateOutput out;
    const std::size_t n_methods = study.methods.size();
    out.curves.assign(n_methods, std::vector<std::optional<Eigen::VectorXd>>(study.bases.size()));
    out.hashes.assign(n_methods, 0);
    const sim::Simulation s = sim::simulate_dataset(config);

    std::optional<recovery::ActivationEstimate> activation;
    std::string activation_error;
    if (std::any_of(study.methods.begin(), study.methods.end(), needs_activation)) {
        try {
            activation = recovery::estimate_activation(s.data, study.activation);
        } catch (const std::exception& e) {
            activation_error = e.what();
        }
    }

    for (std::size_t k = 0; k < n_methods; ++k) {
        const recovery::Method method = study.methods[k];
        out.hashes[k] = content_hash(s.data);
        try {
            recovery::RecoveryResult rec;
            switch (method) {
                case recovery::Method::mm:
                    if (!activation) throw NumericalError("activation: " + activation_error);
                    rec = recovery::recover_mm(s.data, *activation);
                    break;
                case recovery::Method::rc:
                    if (!activation) throw NumericalError("activation: " + activation_error);
                    rec = recovery::recover_rc(s.data, *activation);
                    break;
                default: rec = recovery::recover(method, s.data, {}, &s.truth.x); break;
            }
            for (std::size_t b = 0; b < study.bases.size(); ++b) {
                try {
                    const sofr::SofrFit fit = sofr::fit_sofr(s.data, rec.x_hat, study.bases[b], config.family);
                    out.curves[k][b] = sofr::reconstruct_beta(fit, s.data.grid);
                } catch (const Error& e) {
                    out.errors.push_back(std::string(recovery::to_string(method)) + "/" + study.bases[b].label() +
                                         ": " + e.what());
                }
            }
        } catch (const Error& e) {
            out.errors.push_back(std::string(recovery::to_string(method)) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

StudyResult run_study(const StudyConfig& config) {
    config.validate();
    StudyResult result;
    result.grid = config.base.grid;
    const std::vector<std::string> levels =
        config.factor == Factor::none ? std::vector<std::string>{"default"} : config.levels;
    const int R = config.replicates;

    for (const std::string& level : levels) {
        sim::SimConfig level_config = config.base;
        apply_level(level_config, config.factor, level);
        const Eigen::VectorXd beta_true = level_config.beta_on_grid();

        std::vector<ReplicateOutput> outputs(static_cast<std::size_t>(R));
        parallel_for(R, config.threads, [&](int r) {
            sim::SimConfig c = level_config;
            c.seed = replicate_seed(config.seed, r);
            try {
                outputs[static_cast<std::size_t>(r)] = run_replicate(c, config);
            } catch (const std::exception& e) {
                ReplicateOutput& o = outputs[static_cast<std::size_t>(r)];
                o.curves.assign(config.methods.size(),
                                std::vector<std::optional<Eigen::VectorXd>>(config.bases.size()));
                o.hashes.assign(config.methods.size(), 0);
                o.errors.push_back(std::string("simulation: ") + e.what());
            }
        });

        auto& level_hashes = result.hashes.emplace_back();
        for (int r = 0; r < R; ++r) {
            const auto& o = outputs[static_cast<std::size_t>(r)];
            level_hashes.push_back(o.hashes);
            for (const auto& e : o.errors) {
                result.failure_messages.push_back("level " + level + ", replicate " + std::to_string(r) + ": " + e);
            }
        }

        for (std::size_t k = 0; k < config.methods.size(); ++k) {
            for (std::size_t b = 0; b < config.bases.size(); ++b) {
                MetricsEntry entry;
                entry.method = config.methods[k];
                entry.basis = config.bases[b];
                entry.factor = std::string(to_string(config.factor));
                entry.level = level;
                std::vector<Eigen::VectorXd> curves;
                for (int r = 0; r < R; ++r) {
                    const auto& c = outputs[static_cast<std::size_t>(r)].curves[k][b];
                    if (c) {
                        curves.push_back(*c);
                    } else {
                        ++entry.failures;
                    }
                }
                entry.replicates_used = static_cast<int>(curves.size());
                if (entry.failures > config.max_failure_fraction * R || entry.replicates_used < 2) {
                    std::ostringstream msg;
                    msg << "study: method " << recovery::to_string(entry.method) << " with " << entry.basis.label()
                        << " basis failed on " << entry.failures << " of " << R << " replicates at level " << level;
                    for (const auto& m : result.failure_messages) {
                        msg << "\n  " << m;
                        break;
                    }
                    throw NumericalError(msg.str());
                }
                const CurveMetrics metrics = compute_metrics(curves, beta_true, level_config.grid);
                entry.squared_bias = metrics.squared_bias;
                entry.variance = metrics.variance;
                entry.mean_curve = Eigen::VectorXd::Zero(beta_true.size());
                for (const auto& c : curves) entry.mean_curve += c;
                entry.mean_curve /= static_cast<double>(curves.size());
                if (config.keep_curves) entry.curves = std::move(curves);
                result.entries.push_back(std::move(entry));
            }
        }
    }
    return result;
}

Eigen::VectorXd estimate_beta(const Dataset& data, const Eigen::MatrixXd* true_x, recovery::Method method,
                              const sofr::BasisSpec& basis, Family family, const recovery::RecoveryOptions& options) {
    const recovery::RecoveryResult rec = recovery::recover(method, data, options, true_x);
    const sofr::SofrFit fit = sofr::fit_sofr(data, rec.x_hat, basis, family);
    return sofr::reconstruct_beta(fit, data.grid);
}

BootstrapBand bootstrap_band(const Dataset& data, const Eigen::MatrixXd* true_x, const BootstrapOptions& options) {
    if (options.B < 100) throw ParameterDomainError("bootstrap B must be >= 100");
    if (!(options.alpha > 0 && options.alpha < 1)) throw ParameterDomainError("bootstrap alpha must lie in (0, 1)");
    options.basis.validate();
    const int n = data.n();
    const int m = data.m();

    BootstrapBand band;
    band.B = options.B;
    band.seed = options.seed;
    band.estimate = estimate_beta(data, true_x, options.method, options.basis, options.family, options.recovery);

    std::vector<std::optional<Eigen::VectorXd>> draws(static_cast<std::size_t>(options.B));
    parallel_for(options.B, options.threads, [&](int b) {
        Rng rng = make_rng(options.seed, static_cast<std::uint64_t>(b));
        std::uniform_int_distribution<int> pick(0, n - 1);
        std::vector<int> rows(static_cast<std::size_t>(n));
        for (int& r : rows) r = pick(rng);
        const Dataset resampled = data.resample(rows);
        Eigen::MatrixXd x;
        if (true_x != nullptr) {
            x.resize(n, true_x->cols());
            for (int i = 0; i < n; ++i) x.row(i) = true_x->row(rows[static_cast<std::size_t>(i)]);
        }
        try {
            draws[static_cast<std::size_t>(b)] = estimate_beta(resampled, true_x ? &x : nullptr, options.method,
                                                               options.basis, options.family, options.recovery);
        } catch (const Error&) {
        }
    });

    std::vector<const Eigen::VectorXd*> ok;
    for (const auto& d : draws) {
        if (d) ok.push_back(&*d);
    }
    band.failures = options.B - static_cast<int>(ok.size());
    if (band.failures > 0.10 * options.B) {
        throw NumericalError("bootstrap: " + std::to_string(band.failures) + " of " + std::to_string(options.B) +
                             " resamples failed");
    }
    band.lower.resize(m);
    band.upper.resize(m);
    std::vector<double> column(ok.size());
    for (int t = 0; t < m; ++t) {
        for (std::size_t b = 0; b < ok.size(); ++b) column[b] = (*ok[b])[t];
        band.lower[t] = quantile(column, options.alpha / 2);
        band.upper[t] = quantile(column, 1 - options.alpha / 2);
    }
    return band;
}

}  // namespace zisofr::analysis
