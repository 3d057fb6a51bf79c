#include "zisofr/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "zisofr/errors.hpp"

namespace zisofr::io {

std::string_view to_string(Command command) {
    switch (command) {
        case Command::simulate: return "simulate";
        case Command::fit: return "fit";
        case Command::bootstrap: return "bootstrap";
        case Command::study: return "study";
    }
    return "unknown";
}

Command parse_command(std::string_view name) {
    for (Command c : {Command::simulate, Command::fit, Command::bootstrap, Command::study}) {
        if (name == to_string(c)) return c;
    }
    throw UsageError("unknown command '" + std::string(name) + "' (expected simulate, fit, bootstrap or study)");
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    while (true) {
        const auto comma = s.find(',');
        const auto item = trim(s.substr(0, comma));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

double to_double(const std::string& key, std::string_view v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
        throw UsageError(key + ": expected a number, got '" + std::string(v) + "'");
    }
    return out;
}

long long to_integer(const std::string& key, std::string_view v) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw UsageError(key + ": expected an integer, got '" + std::string(v) + "'");
    }
    return out;
}

std::uint64_t to_unsigned(const std::string& key, std::string_view v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw UsageError(key + ": expected a non-negative integer, got '" + std::string(v) + "'");
    }
    return out;
}

bool to_bool(const std::string& key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UsageError(key + ": expected true or false, got '" + std::string(v) + "'");
}

int positive_int(const std::string& key, std::string_view v, int minimum) {
    const long long x = to_integer(key, v);
    if (x < minimum || x > 100000000) {
        throw ParameterDomainError(key + " must be >= " + std::to_string(minimum));
    }
    return static_cast<int>(x);
}

// Wraps parse errors from domain parsers with the key name.
template <typename Fn>
auto with_key(const std::string& key, Fn fn) {
    try {
        return fn();
    } catch (const ParameterDomainError& e) {
        throw ParameterDomainError(key + ": " + e.what());
    }
}

sofr::BasisSpec parse_basis_item(const std::string& key, std::string_view item) {
    const auto colon = item.find(':');
    sofr::BasisSpec spec;
    spec.family = with_key(key, [&] { return sofr::parse_basis_family(item.substr(0, colon)); });
    spec.K = spec.family == sofr::BasisFamily::fourier ? sofr::kDefaultFourier.K : sofr::kDefaultBSpline.K;
    if (colon != std::string_view::npos) spec.K = positive_int(key, item.substr(colon + 1), 1);
    with_key(key, [&] { spec.validate(); return 0; });
    return spec;
}

struct ParseState {
    RunConfig config;
    std::optional<int> fit_K;
    std::optional<double> rho;
    std::optional<grid::KernelFamily> kernel;
};

using Setter = std::function<void(ParseState&, const std::string& key, std::string_view value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        t["run.command"] = [](ParseState& s, const std::string&, std::string_view v) {
            s.config.command = parse_command(v);
        };
        t["run.seed"] = [](ParseState& s, const std::string& k, std::string_view v) { s.config.seed = to_unsigned(k, v); };
        t["run.threads"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.threads = positive_int(k, v, 0);
        };
        t["run.out"] = [](ParseState& s, const std::string&, std::string_view v) { s.config.out_dir = std::string(v); };

        t["simulation.n"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.simulation.n = positive_int(k, v, 2);
        };
        t["simulation.J"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.simulation.J = positive_int(k, v, 2);
        };
        t["simulation.m"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.simulation.grid = grid::TimeGrid::uniform(positive_int(k, v, 2));
        };
        t["simulation.sigma_u"] = [](ParseState& s, const std::string& k, std::string_view v) {
            const double x = to_double(k, v);
            if (!(x > 0)) throw ParameterDomainError(k + " must be > 0");
            s.config.simulation.sigma_u = x;
        };
        t["simulation.kernel"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.kernel = with_key(k, [&] { return grid::parse_kernel_family(v); });
        };
        t["simulation.rho"] = [](ParseState& s, const std::string& k, std::string_view v) { s.rho = to_double(k, v); };
        t["simulation.q_g"] = [](ParseState& s, const std::string& k, std::string_view v) {
            const double x = to_double(k, v);
            if (!(x >= 0 && x < 1)) throw ParameterDomainError(k + "=" + std::string(v) + " must lie in [0, 1)");
            s.config.simulation.q_g = x;
        };
        t["simulation.family"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.simulation.family = with_key(k, [&] { return parse_family(v); });
        };
        t["simulation.sigma0_sq"] = [](ParseState& s, const std::string& k, std::string_view v) {
            const double x = to_double(k, v);
            if (!(x >= 0)) throw ParameterDomainError(k + " must be >= 0");
            s.config.simulation.sigma0_sq = x;
        };
        t["simulation.theta0_offset"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.simulation.theta[0].offset = to_double(k, v);
        };
        t["simulation.zero_proportion"] = [](ParseState& s, const std::string& k, std::string_view v) {
            with_key(k, [&] {
                analysis::apply_level(s.config.simulation, analysis::Factor::zero_proportion, v);
                return 0;
            });
        };
        t["simulation.p_b"] = [](ParseState& s, const std::string& k, std::string_view v) {
            const double x = to_double(k, v);
            if (!(x >= 0 && x <= 1)) throw ParameterDomainError(k + " must lie in [0, 1]");
            s.config.simulation.p_b = x;
        };
        t["simulation.sigma_c_sq"] = [](ParseState& s, const std::string& k, std::string_view v) {
            const double x = to_double(k, v);
            if (!(x >= 0)) throw ParameterDomainError(k + " must be >= 0");
            s.config.simulation.sigma_c_sq = x;
        };
        t["simulation.gamma"] = [](ParseState& s, const std::string& k, std::string_view v) {
            const auto items = split_list(v);
            if (items.size() != 3) throw ParameterDomainError(k + " needs three comma-separated values");
            for (int j = 0; j < 3; ++j) s.config.simulation.gamma[j] = to_double(k, items[static_cast<std::size_t>(j)]);
        };

        t["study.replicates"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.study.replicates = positive_int(k, v, 2);
        };
        t["study.methods"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.study.methods.clear();
            for (const auto& item : split_list(v)) {
                s.config.study.methods.push_back(with_key(k, [&] { return recovery::parse_method(item); }));
            }
        };
        t["study.bases"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.study.bases.clear();
            for (const auto& item : split_list(v)) s.config.study.bases.push_back(parse_basis_item(k, item));
            if (s.config.study.bases.empty()) throw ParameterDomainError(k + " must name at least one basis");
        };
        t["study.factor"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.study.factor = with_key(k, [&] { return analysis::parse_factor(v); });
        };
        t["study.levels"] = [](ParseState& s, const std::string&, std::string_view v) {
            s.config.study.levels = split_list(v);
        };
        t["study.activation"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.study.activation = with_key(k, [&] { return recovery::parse_activation_method(v); });
        };
        t["study.keep_curves"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.study.keep_curves = to_bool(k, v);
        };

        t["fit.method"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.fit.method = with_key(k, [&] { return recovery::parse_method(v); });
        };
        t["fit.basis"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.fit.basis.family = with_key(k, [&] { return sofr::parse_basis_family(v); });
        };
        t["fit.K"] = [](ParseState& s, const std::string& k, std::string_view v) { s.fit_K = positive_int(k, v, 1); };
        t["fit.activation"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.fit.activation = with_key(k, [&] { return recovery::parse_activation_method(v); });
        };
        t["fit.smoothed"] = [](ParseState& s, const std::string& k, std::string_view v) {
            if (to_bool(k, v)) s.config.fit.activation = recovery::ActivationMethod::logistic_smoothed;
        };
        t["fit.family"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.fit.family = with_key(k, [&] { return parse_family(v); });
        };

        t["bootstrap.B"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.B = positive_int(k, v, 100);
        };
        t["bootstrap.alpha"] = [](ParseState& s, const std::string& k, std::string_view v) {
            const double x = to_double(k, v);
            if (!(x > 0 && x < 1)) throw ParameterDomainError(k + " must lie in (0, 1)");
            s.config.alpha = x;
        };

        t["data.w_path"] = [](ParseState& s, const std::string&, std::string_view v) {
            s.config.data.w_path = std::string(v);
        };
        t["data.subjects_path"] = [](ParseState& s, const std::string&, std::string_view v) {
            s.config.data.subjects_path = std::string(v);
        };
        t["data.truth_path"] = [](ParseState& s, const std::string&, std::string_view v) {
            s.config.data.truth_path = std::string(v);
        };
        t["data.grid_len"] = [](ParseState& s, const std::string& k, std::string_view v) {
            s.config.data.grid_len = positive_int(k, v, 2);
        };
        return t;
    }();
    return table;
}

std::string resolve_key(std::string_view raw, int line, std::string_view source) {
    const auto& table = setters();
    const std::string key(raw);
    if (table.count(key) != 0) return key;
    if (key.find('.') == std::string::npos) {
        std::vector<std::string> hits;
        for (const auto& [name, setter] : table) {
            if (name.substr(name.find('.') + 1) == key) hits.push_back(name);
        }
        if (hits.size() == 1) return hits.front();
        for (const char* preferred : {"run.", "simulation."}) {
            for (const auto& h : hits) {
                if (h.rfind(preferred, 0) == 0) return h;
            }
        }
        if (hits.size() > 1) {
            throw UsageError(std::string(source) + ":" + std::to_string(line) + ": key '" + key +
                             "' is ambiguous; use a section prefix");
        }
    }
    throw UsageError(std::string(source) + ":" + std::to_string(line) + ": unknown key '" + key + "'");
}

std::string format_double(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [name, setter] : setters()) keys.push_back(name);
    return keys;
}

void finalize(RunConfig& c) {
    c.study.base = c.simulation;
    c.study.seed = c.seed;
    c.study.threads = c.threads;
    c.simulation.seed = c.seed;
    c.simulation.validate();
    if (c.command == Command::study) c.study.validate();
    if (c.command == Command::fit || c.command == Command::bootstrap) {
        if (c.data.w_path.empty()) throw UsageError("data.w_path is required for " + std::string(to_string(c.command)));
        if (c.data.subjects_path.empty()) {
            throw UsageError("data.subjects_path is required for " + std::string(to_string(c.command)));
        }
        if (c.fit.method == recovery::Method::benchmark && c.data.truth_path.empty()) {
            throw UsageError("data.truth_path is required for the benchmark method");
        }
    }
    if (c.out_dir.empty()) throw UsageError("run.out must not be empty");

    auto& r = c.resolved;
    r.clear();
    r.emplace_back("run.command", std::string(to_string(c.command)));
    r.emplace_back("run.seed", std::to_string(c.seed));
    r.emplace_back("run.threads", std::to_string(c.threads));
    r.emplace_back("run.out", c.out_dir);
    const auto& s = c.simulation;
    r.emplace_back("simulation.n", std::to_string(s.n));
    r.emplace_back("simulation.J", std::to_string(s.J));
    r.emplace_back("simulation.m", std::to_string(s.grid.size()));
    r.emplace_back("simulation.sigma_u", format_double(s.sigma_u));
    r.emplace_back("simulation.kernel", std::string(grid::to_string(s.u_kernel.family())));
    r.emplace_back("simulation.rho", format_double(s.u_kernel.rho()));
    r.emplace_back("simulation.q_g", format_double(s.q_g));
    r.emplace_back("simulation.family", std::string(to_string(s.family)));
    r.emplace_back("simulation.sigma0_sq", format_double(s.sigma0_sq));
    r.emplace_back("simulation.theta0_offset", format_double(s.theta[0].offset));
    r.emplace_back("simulation.p_b", format_double(s.p_b));
    r.emplace_back("simulation.sigma_c_sq", format_double(s.sigma_c_sq));
    r.emplace_back("simulation.gamma",
                   format_double(s.gamma[0]) + "," + format_double(s.gamma[1]) + "," + format_double(s.gamma[2]));
    const auto& st = c.study;
    r.emplace_back("study.replicates", std::to_string(st.replicates));
    std::string methods;
    for (auto m : st.methods) methods += (methods.empty() ? "" : ",") + std::string(recovery::to_string(m));
    r.emplace_back("study.methods", methods);
    std::string bases;
    for (const auto& b : st.bases) bases += (bases.empty() ? "" : ",") + b.label() + ":" + std::to_string(b.K);
    r.emplace_back("study.bases", bases);
    r.emplace_back("study.factor", std::string(analysis::to_string(st.factor)));
    std::string levels;
    for (const auto& l : st.levels) levels += (levels.empty() ? "" : ",") + l;
    r.emplace_back("study.levels", levels);
    r.emplace_back("study.activation", std::string(recovery::to_string(st.activation)));
    r.emplace_back("study.keep_curves", st.keep_curves ? "true" : "false");
    r.emplace_back("fit.method", std::string(recovery::to_string(c.fit.method)));
    r.emplace_back("fit.basis", c.fit.basis.label());
    r.emplace_back("fit.K", std::to_string(c.fit.basis.K));
    r.emplace_back("fit.activation", std::string(recovery::to_string(c.fit.activation)));
    r.emplace_back("fit.family", std::string(to_string(c.fit.family)));
    r.emplace_back("bootstrap.B", std::to_string(c.B));
    r.emplace_back("bootstrap.alpha", format_double(c.alpha));
    r.emplace_back("data.w_path", c.data.w_path);
    r.emplace_back("data.subjects_path", c.data.subjects_path);
    r.emplace_back("data.truth_path", c.data.truth_path);
    r.emplace_back("data.grid_len", std::to_string(c.data.grid_len));
}

RunConfig parse_config_text(std::string_view text, std::string_view source) {
    ParseState state;
    std::map<std::string, int> seen;
    int line_no = 0;
    std::string section;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw UsageError(std::string(source) + ":" + std::to_string(line_no) + ": malformed section header");
            }
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw UsageError(std::string(source) + ":" + std::to_string(line_no) + ": expected key = value");
        }
        std::string raw_key(trim(line.substr(0, eq)));
        if (!section.empty() && raw_key.find('.') == std::string::npos) raw_key = section + "." + raw_key;
        const std::string_view value = trim(line.substr(eq + 1));
        const std::string key = resolve_key(raw_key, line_no, source);
        if (seen.count(key) != 0) {
            throw UsageError(std::string(source) + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                             "' (first set on line " + std::to_string(seen[key]) + ")");
        }
        seen[key] = line_no;
        setters().at(key)(state, key, value);
    }

    RunConfig& c = state.config;
    if (state.kernel || state.rho) {
        const grid::KernelFamily fam = state.kernel.value_or(c.simulation.u_kernel.family());
        const double rho = state.rho.value_or(c.simulation.u_kernel.rho());
        c.simulation.u_kernel = with_key("simulation.rho", [&] { return grid::Kernel(fam, rho); });
    }
    c.fit.basis.K = state.fit_K.value_or(c.fit.basis.family == sofr::BasisFamily::fourier ? sofr::kDefaultFourier.K
                                                                                          : sofr::kDefaultBSpline.K);
    with_key("fit.K", [&] { c.fit.basis.validate(); return 0; });
    if (seen.count("fit.family") == 0) c.fit.family = c.simulation.family;
    finalize(c);
    return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open config file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path.string());
}

}  // namespace zisofr::io
