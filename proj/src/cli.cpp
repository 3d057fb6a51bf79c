#include "zisofr/cli.hpp"

#include <filesystem>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "zisofr/analysis.hpp"
#include "zisofr/config.hpp"
#include "zisofr/csv_io.hpp"
#include "zisofr/errors.hpp"
#include "zisofr/version.hpp"

namespace zisofr::io {

namespace {

namespace fs = std::filesystem;

nlohmann::json base_meta(const RunConfig& config) {
    nlohmann::json meta;
    meta["tool"] = "zisofr";
    meta["version"] = kVersion;
    meta["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION);
    meta["command"] = std::string(to_string(config.command));
    meta["seed"] = config.seed;
    meta["threads"] = analysis::resolve_threads(config.threads);
    nlohmann::json cfg = nlohmann::json::object();
    std::string text;
    for (const auto& [k, v] : config.resolved) {
        cfg[k] = v;
        text += k + " = " + v + "\n";
    }
    meta["config"] = cfg;
    meta["config_text"] = text;
    return meta;
}

Dataset load_input(const RunConfig& config) {
    return load_dataset(config.data.w_path, config.data.subjects_path, config.data.grid_len, config.fit.family);
}

std::optional<Eigen::MatrixXd> load_truth(const RunConfig& config, const Dataset& data) {
    if (config.data.truth_path.empty()) return std::nullopt;
    return load_curves(data, config.data.truth_path);
}

void run_simulate(const RunConfig& config, const fs::path& out, std::ostream& log) {
    const sim::Simulation s = sim::simulate_dataset(config.simulation);
    save_dataset(s.data, out / "w.csv", out / "subjects.csv");
    save_curves(s.data, s.truth.x, out / "truth_x.csv");
    nlohmann::json meta = base_meta(config);
    meta["dataset_hash"] = content_hash(s.data);
    write_json(meta, out / "run_meta.json");
    log << "simulated " << s.data.n() << " subjects into " << out.string() << '\n';
}

void run_fit(const RunConfig& config, const fs::path& out, std::ostream& log) {
    const Dataset data = load_input(config);
    const auto truth = load_truth(config, data);
    recovery::RecoveryOptions options{config.fit.activation};
    const recovery::RecoveryResult rec =
        recovery::recover(config.fit.method, data, options, truth ? &*truth : nullptr);
    const sofr::SofrFit fit = sofr::fit_sofr(data, rec.x_hat, config.fit.basis, config.fit.family);
    const Eigen::VectorXd beta = sofr::reconstruct_beta(fit, data.grid);

    std::vector<BetaRow> rows;
    for (int t = 0; t < data.m(); ++t) {
        rows.push_back({std::string(recovery::to_string(config.fit.method)), config.fit.basis.label(), "data",
                        data.grid[t], beta[t], std::nullopt, std::nullopt});
    }
    write_beta_csv(rows, out / "beta_hat.csv");

    nlohmann::json meta = base_meta(config);
    meta["dataset_hash"] = content_hash(data);
    meta["fit"] = {{"basis_coefficients", std::vector<double>(fit.c.data(), fit.c.data() + fit.c.size())},
                   {"gamma", std::vector<double>(fit.gamma_hat.data(), fit.gamma_hat.data() + fit.gamma_hat.size())},
                   {"dispersion", fit.dispersion},
                   {"converged", fit.converged},
                   {"iterations", fit.iterations},
                   {"separated", fit.separated}};
    nlohmann::json diags = nlohmann::json::array();
    for (const auto& d : rec.diagnostics) {
        diags.push_back({{"t_index", d.t},
                         {"subject", d.subject >= 0 ? data.subjects[static_cast<std::size_t>(d.subject)].id : ""},
                         {"message", d.message}});
    }
    meta["diagnostics"] = diags;
    if (rec.activation && !rec.activation->fallback_points.empty()) {
        meta["activation_fallback_t_index"] = rec.activation->fallback_points;
    }
    write_json(meta, out / "run_meta.json");
    if (fit.separated) log << "warning: outcome model shows separation\n";
    log << "fitted " << recovery::to_string(config.fit.method) << " on " << data.n() << " subjects; "
        << rec.diagnostics.size() << " diagnostics\n";
}

void run_bootstrap(const RunConfig& config, const fs::path& out, std::ostream& log) {
    const Dataset data = load_input(config);
    const auto truth = load_truth(config, data);
    analysis::BootstrapOptions options;
    options.method = config.fit.method;
    options.basis = config.fit.basis;
    options.family = config.fit.family;
    options.recovery.activation = config.fit.activation;
    options.B = config.B;
    options.alpha = config.alpha;
    options.seed = config.seed;
    options.threads = config.threads;
    const analysis::BootstrapBand band = analysis::bootstrap_band(data, truth ? &*truth : nullptr, options);

    std::vector<BetaRow> rows;
    for (int t = 0; t < data.m(); ++t) {
        rows.push_back({std::string(recovery::to_string(config.fit.method)), config.fit.basis.label(), "data",
                        data.grid[t], band.estimate[t], band.lower[t], band.upper[t]});
    }
    write_beta_csv(rows, out / "beta_hat.csv");
    nlohmann::json meta = base_meta(config);
    meta["dataset_hash"] = content_hash(data);
    meta["bootstrap"] = {{"B", band.B}, {"failures", band.failures}, {"alpha", config.alpha}};
    write_json(meta, out / "run_meta.json");
    log << "bootstrap band from " << (band.B - band.failures) << " of " << band.B << " resamples\n";
}

void run_study_command(const RunConfig& config, const fs::path& out, std::ostream& log) {
    const analysis::StudyResult result = analysis::run_study(config.study);
    emit_results(result, out);
    nlohmann::json meta = base_meta(config);
    meta["failures"] = result.failure_messages;
    write_json(meta, out / "run_meta.json");
    log << "study wrote " << result.entries.size() << " metric rows to " << out.string() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Scalar-on-function regression with zero-inflated functional predictors measured with error."};
    app.footer(
        "The command (simulate, fit, bootstrap, study) and all model settings come from the config file,\n"
        "a flat list of `key = value` lines; see README for the keys.\n"
        "Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical failure.");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
    app.add_option("--config", config_path, "Path to the key=value run configuration")->required();
    app.add_option("--seed", seed, "Master seed (overrides run.seed)");
    app.add_option("--out", out_dir, "Output directory (overrides run.out)");
    app.add_option("--threads", threads, "Worker thread cap for study/bootstrap (overrides run.threads)")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig config = parse_config(config_path);
        if (seed) config.seed = *seed;
        if (out_dir) config.out_dir = *out_dir;
        if (threads) config.threads = *threads;
        finalize(config);
        const fs::path out_path = config.out_dir;
        std::error_code ec;
        fs::create_directories(out_path, ec);
        if (ec) throw DataError("cannot create output directory '" + out_path.string() + "': " + ec.message());
        switch (config.command) {
            case Command::simulate: run_simulate(config, out_path, out); break;
            case Command::fit: run_fit(config, out_path, out); break;
            case Command::bootstrap: run_bootstrap(config, out_path, out); break;
            case Command::study: run_study_command(config, out_path, out); break;
        }
        return kExitOk;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (...) {
        err << "numerical failure: unknown error\n";
        return kExitNumerical;
    }
}

}  // namespace zisofr::io
