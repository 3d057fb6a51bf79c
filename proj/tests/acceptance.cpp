// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "property_checks.hpp"
#include "zisofr/analysis.hpp"
#include "zisofr/glm.hpp"
#include "zisofr/simulator.hpp"
#include "zisofr/sofr.hpp"

using namespace zisofr;
using props::describe;

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr int kReplicates = 500;

struct Verdict {
    bool ok = true;
    std::vector<std::string> notes;

    void require(bool condition, const std::string& what) {
        notes.push_back(std::string(condition ? "ok   " : "FAIL ") + what);
        ok = ok && condition;
    }
};

int failures = 0;

void report(int number, const std::string& title, const Verdict& v, double seconds) {
    std::printf("%s criterion %d: %s (%.1f s)\n", v.ok ? "PASS" : "FAIL", number, title.c_str(), seconds);
    for (const auto& n : v.notes) std::printf("      %s\n", n.c_str());
    std::fflush(stdout);
    if (!v.ok) ++failures;
}

template <typename Body>
void criterion(int number, const std::string& title, Body body) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
        body(v);
    } catch (const std::exception& e) {
        v.require(false, describe("threw: ", e.what()));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(number, title, v, seconds);
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

using Table = std::map<std::string, std::map<recovery::Method, analysis::MetricsEntry>>;

// Runs a B-spline K=7 study at the fixed seed and indexes entries by level and method.
Table study(analysis::Factor factor, std::vector<std::string> levels, std::vector<recovery::Method> methods,
            double* seconds = nullptr) {
    analysis::StudyConfig c;
    c.replicates = kReplicates;
    c.seed = kSeed;
    c.bases = {sofr::kDefaultBSpline};
    c.methods = std::move(methods);
    c.factor = factor;
    c.levels = std::move(levels);
    const auto start = std::chrono::steady_clock::now();
    const auto result = analysis::run_study(c);
    if (seconds) *seconds = elapsed_since(start);
    Table out;
    for (const auto& e : result.entries) out[e.level][e.method] = e;
    return out;
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::string fmt(double v) { return describe(v); }

}  // namespace

int main() {
    const int workers = analysis::resolve_threads(0);
    std::printf("acceptance: seed %llu, %d replicates, B-spline K=7, %d worker thread(s)\n",
                static_cast<unsigned long long>(kSeed), kReplicates, workers);

    criterion(1, "Gaussian default setting, N=100: bias bands and method ordering", [&](Verdict& v) {
        double seconds = 0.0;
        using enum recovery::Method;
        auto t = study(analysis::Factor::none, {}, {benchmark, mm, rc, average, one_day}, &seconds);
        const auto& row = t.begin()->second;
        const double b = row.at(benchmark).squared_bias;
        const double mm_b = row.at(mm).squared_bias;
        const double rc_b = row.at(rc).squared_bias;
        const double avg = row.at(average).squared_bias;
        const double one = row.at(one_day).squared_bias;
        v.require(b <= 5e-4, "benchmark " + fmt(b) + " <= 5e-4");
        v.require(within(mm_b, 0.0015, 0.007), "mm " + fmt(mm_b) + " in [0.0015, 0.007]");
        v.require(within(rc_b, 0.0025, 0.010), "rc " + fmt(rc_b) + " in [0.0025, 0.010]");
        v.require(within(avg, 0.12, 0.17), "average " + fmt(avg) + " in [0.12, 0.17]");
        v.require(within(one, 0.33, 0.44), "one_day " + fmt(one) + " in [0.33, 0.44]");
        v.require(b < mm_b && mm_b < rc_b && rc_b < avg && avg < one,
                  "ordering benchmark < mm < rc < average < one_day");
        v.require(seconds <= 1800, describe("runtime ", seconds, " s <= 1800 s with ", workers, " worker(s)"));
    });

    criterion(2, "consistency trend from N=50 to N=1000", [&](Verdict& v) {
        using enum recovery::Method;
        auto t = study(analysis::Factor::n, {"50", "1000"}, {benchmark, mm});
        const double mm50 = t["50"][mm].squared_bias;
        const double mm1000 = t["1000"][mm].squared_bias;
        const double ratio = t["50"][benchmark].variance / t["1000"][benchmark].variance;
        v.require(mm1000 < mm50, "mm squared bias " + fmt(mm1000) + " (N=1000) < " + fmt(mm50) + " (N=50)");
        v.require(ratio >= 8.0, "benchmark variance ratio N=50/N=1000 " + fmt(ratio) + " >= 8");
    });

    criterion(3, "measurement-error scaling over sigma_u in {1, 2, 3}", [&](Verdict& v) {
        using enum recovery::Method;
        const std::vector<std::string> levels{"1", "2", "3"};
        auto t = study(analysis::Factor::sigma_u, levels, {average, mm, rc});
        const double target[] = {0.1445, 0.1913, 0.2534};
        for (auto method : {average, mm, rc}) {
            std::string values;
            bool monotone = true;
            for (std::size_t k = 0; k < levels.size(); ++k) {
                const double s = t[levels[k]][method].squared_bias;
                values += (k ? ", " : "") + fmt(s);
                if (k > 0) monotone = monotone && s > t[levels[k - 1]][method].squared_bias;
            }
            v.require(monotone, std::string(recovery::to_string(method)) + " increasing: " + values);
        }
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const double s = t[levels[k]][average].squared_bias;
            v.require(std::abs(s - target[k]) <= 0.25 * target[k],
                      "average at sigma_u=" + levels[k] + ": " + fmt(s) + " within 25% of " + fmt(target[k]));
        }
    });

    criterion(4, "zero-proportion effect on the naive average", [&](Verdict& v) {
        const std::vector<std::string> levels{"0.255", "0.294", "0.335", "0.403"};
        auto t = study(analysis::Factor::zero_proportion, levels, {recovery::Method::average});
        const double target[] = {0.1074, 0.1258, 0.1445, 0.1770};
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const double s = t[levels[k]][recovery::Method::average].squared_bias;
            v.require(std::abs(s - target[k]) <= 0.25 * target[k],
                      "zero proportion " + levels[k] + ": " + fmt(s) + " within 25% of " + fmt(target[k]));
            if (k > 0) {
                const double prev = t[levels[k - 1]][recovery::Method::average].squared_bias;
                v.require(s > prev, "increasing from " + levels[k - 1] + " to " + levels[k]);
            }
        }
    });

    criterion(5, "non-zero-inflated mixed model instability at N=50", [&](Verdict& v) {
        using enum recovery::Method;
        auto t = study(analysis::Factor::n, {"50"}, {mm, nonzi_mm});
        const double ratio = t["50"][nonzi_mm].variance / t["50"][mm].variance;
        v.require(ratio >= 5.0, "variance nonzi_mm " + fmt(t["50"][nonzi_mm].variance) + " / mm " +
                                    fmt(t["50"][mm].variance) + " = " + fmt(ratio) + " >= 5");
    });

    criterion(6, "calibration expectation vs 1e6-node trapezoid oracle, 100 draws", [&](Verdict& v) {
        std::string log;
        const auto out = props::rc_matches_oracle(kSeed, 100, 1e-6, &log);
        v.require(out.ok, out.ok ? log + " <= 1e-6" : out.detail);
    });

    criterion(7, "mixed model vs exact-likelihood grid oracle, 20 instances", [&](Verdict& v) {
        std::string log;
        const auto out = props::mixed_model_matches_oracle(kSeed, 20, 1e-6, &log);
        v.require(out.ok, out.ok ? log + " <= 1e-6" : out.detail);
    });

    criterion(8, "GLM correctness", [&](Verdict& v) {
        props::Gen g(kSeed);
        double worst_gauss = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const auto [design, y] = props::random_design(g, Family::gaussian);
            const auto fit = sofr::fit_glm(design, y, Family::gaussian);
            const Eigen::MatrixXd& X = design.matrix;
            const Eigen::VectorXd direct = (X.transpose() * X).ldlt().solve(X.transpose() * y);
            worst_gauss = std::max(worst_gauss, (fit.coefficients() - direct).cwiseAbs().maxCoeff());
        }
        v.require(worst_gauss <= 1e-10, "gaussian vs normal equations: max abs difference " + fmt(worst_gauss));

        double worst_logit = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const int n = g.integer(5, 400);
            Eigen::VectorXd y(n);
            const double p = g.uniform(0.05, 0.95);
            for (int i = 0; i < n; ++i) y[i] = g.coin(p) ? 1.0 : 0.0;
            if (y.minCoeff() == y.maxCoeff()) y[0] = 1.0 - y[0];
            sofr::Design intercept_only;
            intercept_only.matrix = Eigen::MatrixXd::Ones(n, 1);
            intercept_only.column_names = {"intercept"};
            const auto fit = sofr::fit_glm(intercept_only, y, Family::bernoulli);
            worst_logit = std::max(worst_logit, std::abs(fit.coefficients()[0] - logit(y.mean())));
        }
        v.require(worst_logit <= 1e-8, "intercept-only logistic vs logit(mean y): max abs difference " + fmt(worst_logit));
    });

    criterion(9, "property suites", [&](Verdict& v) {
        for (const auto& prop : props::all_properties()) {
            const auto out = prop.check(kSeed);
            v.require(out.ok, prop.name + (out.ok ? "" : ": " + out.detail));
        }
    });

    criterion(10, "bootstrap coverage, 200 outer replicates x B=500, benchmark method", [&](Verdict& v) {
        const auto start = std::chrono::steady_clock::now();
        constexpr int kOuter = 200;
        const sim::SimConfig base;
        const Eigen::VectorXd truth = base.beta_on_grid();
        double covered = 0.0;
        int total_failures = 0;
        for (int r = 0; r < kOuter; ++r) {
            sim::SimConfig c = base;
            c.seed = analysis::replicate_seed(kSeed, r);
            const auto s = sim::simulate_dataset(c);
            analysis::BootstrapOptions opt;
            opt.method = recovery::Method::benchmark;
            opt.B = 500;
            opt.alpha = 0.05;
            opt.seed = derive_seed(kSeed, 0xb007, static_cast<std::uint64_t>(r));
            const auto band = analysis::bootstrap_band(s.data, &s.truth.x, opt);
            total_failures += band.failures;
            covered += ((truth.array() >= band.lower.array()) && (truth.array() <= band.upper.array())).cast<double>().mean();
        }
        const double coverage = covered / kOuter;
        const double seconds = elapsed_since(start);
        v.require(within(coverage, 0.90, 0.99), "grid-averaged pointwise coverage " + fmt(coverage) + " in [0.90, 0.99]");
        v.require(seconds <= 1200, describe("runtime ", seconds, " s <= 1200 s with ", workers, " worker(s); ",
                                            total_failures, " failed resamples"));
    });

    std::printf("acceptance: %d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
