#include "zisofr/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "zisofr/errors.hpp"

namespace zisofr::io {

std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    if (ec != std::errc()) throw std::runtime_error("format_number failed");
    return {buf, ptr};
}

double parse_number(std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw DataError("not a number: '" + std::string(text) + "'");
    return v;
}

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> lines;  // 1-based file line of each row
};

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    while (true) {
        const auto comma = line.find(',');
        out.emplace_back(line.substr(0, comma));
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    CsvTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
        table.lines.push_back(line_no);
    }
    if (table.header.empty()) throw DataError(path.string() + ": missing header row");
    return table;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw DataError("error writing '" + path.string() + "'");
}

std::string where(const std::filesystem::path& path, int line) { return path.string() + ":" + std::to_string(line) + ": "; }

double field_number(const std::filesystem::path& path, int line, const std::string& column, const std::string& text) {
    try {
        return parse_number(text);
    } catch (const DataError&) {
        throw DataError(where(path, line) + column + " is not a number ('" + text + "')");
    }
}

long long field_integer(const std::filesystem::path& path, int line, const std::string& column,
                        const std::string& text) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw DataError(where(path, line) + column + " is not an integer ('" + text + "')");
    }
    return v;
}

void expect_header(const CsvTable& table, const std::filesystem::path& path, const std::vector<std::string>& prefix) {
    for (std::size_t j = 0; j < prefix.size(); ++j) {
        if (j >= table.header.size() || table.header[j] != prefix[j]) {
            std::string want;
            for (const auto& p : prefix) want += (want.empty() ? "" : ",") + p;
            throw DataError(path.string() + ":1: header must start with " + want);
        }
    }
}

}  // namespace

void save_dataset(const Dataset& data, const std::filesystem::path& w_path, const std::filesystem::path& subjects_path) {
    {
        auto out = open_out(w_path);
        out << "subject_id,replicate,t_index,value\n";
        for (const auto& s : data.subjects) {
            for (Eigen::Index j = 0; j < s.w.rows(); ++j) {
                for (Eigen::Index t = 0; t < s.w.cols(); ++t) {
                    out << s.id << ',' << (j + 1) << ',' << t << ',' << format_number(s.w(j, t)) << '\n';
                }
            }
        }
        close_checked(out, w_path);
    }
    auto out = open_out(subjects_path);
    out << "subject_id,y";
    for (const auto& name : data.covariate_names) out << ',' << name;
    out << '\n';
    for (const auto& s : data.subjects) {
        out << s.id << ',' << format_number(s.y);
        for (Eigen::Index k = 0; k < s.z.size(); ++k) out << ',' << format_number(s.z[k]);
        out << '\n';
    }
    close_checked(out, subjects_path);
}

Dataset load_dataset(const std::filesystem::path& w_path, const std::filesystem::path& subjects_path, int grid_len,
                     std::optional<Family> family) {
    if (grid_len < 2) throw DataError("grid length must be >= 2");
    Dataset data;
    data.grid = grid::TimeGrid::uniform(grid_len);

    const CsvTable subj = read_csv(subjects_path);
    expect_header(subj, subjects_path, {"subject_id", "y"});
    data.covariate_names.assign(subj.header.begin() + 2, subj.header.end());
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < subj.rows.size(); ++r) {
        const auto& row = subj.rows[r];
        const int line = subj.lines[r];
        if (row[0].empty()) throw DataError(where(subjects_path, line) + "empty subject_id");
        if (!index.emplace(row[0], r).second) {
            throw DataError(where(subjects_path, line) + "duplicate subject_id '" + row[0] + "'");
        }
        SubjectRecord rec;
        rec.id = row[0];
        rec.y = field_number(subjects_path, line, "y", row[1]);
        if (family == Family::bernoulli && rec.y != 0.0 && rec.y != 1.0) {
            throw DataError(where(subjects_path, line) + "y must be 0 or 1 for a bernoulli outcome");
        }
        rec.z.resize(static_cast<Eigen::Index>(row.size() - 2));
        for (std::size_t k = 2; k < row.size(); ++k) {
            rec.z[static_cast<Eigen::Index>(k - 2)] = field_number(subjects_path, line, subj.header[k], row[k]);
        }
        data.subjects.push_back(std::move(rec));
    }
    if (data.subjects.empty()) throw DataError(subjects_path.string() + ": no subjects");

    const CsvTable wt = read_csv(w_path);
    expect_header(wt, w_path, {"subject_id", "replicate", "t_index", "value"});
    // subject -> replicate -> t -> (value, line)
    std::vector<std::map<long long, std::vector<int>>> seen(data.subjects.size());
    std::vector<std::map<long long, std::vector<double>>> values(data.subjects.size());
    for (std::size_t r = 0; r < wt.rows.size(); ++r) {
        const auto& row = wt.rows[r];
        const int line = wt.lines[r];
        const auto it = index.find(row[0]);
        if (it == index.end()) {
            throw DataError(where(w_path, line) + "subject '" + row[0] + "' is not in " + subjects_path.string());
        }
        const long long rep = field_integer(w_path, line, "replicate", row[1]);
        if (rep < 1) throw DataError(where(w_path, line) + "replicate must be >= 1");
        const long long t = field_integer(w_path, line, "t_index", row[2]);
        if (t < 0 || t >= grid_len) {
            throw DataError(where(w_path, line) + "t_index " + row[2] + " outside [0, " + std::to_string(grid_len) + ")");
        }
        const double v = field_number(w_path, line, "value", row[3]);
        if (!std::isfinite(v)) throw DataError(where(w_path, line) + "value is not finite");
        auto& lines = seen[it->second][rep];
        auto& vals = values[it->second][rep];
        if (lines.empty()) {
            lines.assign(static_cast<std::size_t>(grid_len), 0);
            vals.assign(static_cast<std::size_t>(grid_len), 0.0);
        }
        if (lines[static_cast<std::size_t>(t)] != 0) {
            throw DataError(where(w_path, line) + "duplicate key (" + row[0] + ", " + row[1] + ", " + row[2] +
                            "), first on line " + std::to_string(lines[static_cast<std::size_t>(t)]));
        }
        lines[static_cast<std::size_t>(t)] = line;
        vals[static_cast<std::size_t>(t)] = v;
    }
    for (std::size_t s = 0; s < data.subjects.size(); ++s) {
        auto& rec = data.subjects[s];
        if (seen[s].empty()) {
            throw DataError(subjects_path.string() + ":" + std::to_string(subj.lines[s]) + ": subject '" + rec.id +
                            "' has no rows in " + w_path.string());
        }
        rec.w.resize(static_cast<Eigen::Index>(seen[s].size()), grid_len);
        Eigen::Index j = 0;
        for (const auto& [rep, lines] : seen[s]) {
            for (int t = 0; t < grid_len; ++t) {
                if (lines[static_cast<std::size_t>(t)] == 0) {
                    throw DataError(w_path.string() + ": subject '" + rec.id + "' replicate " + std::to_string(rep) +
                                    " is missing t_index " + std::to_string(t));
                }
                rec.w(j, t) = values[s].at(rep)[static_cast<std::size_t>(t)];
            }
            ++j;
        }
    }
    data.validate();
    return data;
}

void save_curves(const Dataset& data, const Eigen::MatrixXd& x, const std::filesystem::path& path) {
    if (x.rows() != data.n() || x.cols() != data.m()) throw DataError("save_curves: shape does not match dataset");
    auto out = open_out(path);
    out << "subject_id,t_index,value\n";
    for (int i = 0; i < data.n(); ++i) {
        for (int t = 0; t < data.m(); ++t) {
            out << data.subjects[static_cast<std::size_t>(i)].id << ',' << t << ',' << format_number(x(i, t)) << '\n';
        }
    }
    close_checked(out, path);
}

Eigen::MatrixXd load_curves(const Dataset& data, const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    expect_header(table, path, {"subject_id", "t_index", "value"});
    std::map<std::string, int> index;
    for (int i = 0; i < data.n(); ++i) index[data.subjects[static_cast<std::size_t>(i)].id] = i;
    Eigen::MatrixXd x(data.n(), data.m());
    Eigen::MatrixXi filled = Eigen::MatrixXi::Zero(data.n(), data.m());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const int line = table.lines[r];
        const auto it = index.find(row[0]);
        if (it == index.end()) throw DataError(where(path, line) + "unknown subject '" + row[0] + "'");
        const long long t = field_integer(path, line, "t_index", row[1]);
        if (t < 0 || t >= data.m()) throw DataError(where(path, line) + "t_index out of range");
        if (filled(it->second, t) != 0) throw DataError(where(path, line) + "duplicate key");
        filled(it->second, t) = line;
        x(it->second, t) = field_number(path, line, "value", row[2]);
    }
    for (int i = 0; i < data.n(); ++i) {
        for (int t = 0; t < data.m(); ++t) {
            if (filled(i, t) == 0) {
                throw DataError(path.string() + ": subject '" + data.subjects[static_cast<std::size_t>(i)].id +
                                "' is missing t_index " + std::to_string(t));
            }
        }
    }
    return x;
}

void write_beta_csv(const std::vector<BetaRow>& rows, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "method,basis,level,t,estimate,lower,upper\n";
    for (const auto& r : rows) {
        out << r.method << ',' << r.basis << ',' << r.level << ',' << format_number(r.t) << ','
            << format_number(r.estimate) << ',' << (r.lower ? format_number(*r.lower) : "") << ','
            << (r.upper ? format_number(*r.upper) : "") << '\n';
    }
    close_checked(out, path);
}

void write_metrics_csv(const std::vector<analysis::MetricsEntry>& entries, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "method,basis,factor,level,squared_bias,variance\n";
    for (const auto& e : entries) {
        out << recovery::to_string(e.method) << ',' << e.basis.label() << ',' << e.factor << ',' << e.level << ','
            << format_number(e.squared_bias) << ',' << format_number(e.variance) << '\n';
    }
    close_checked(out, path);
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    expect_header(table, path, {"method", "basis", "factor", "level", "squared_bias", "variance"});
    std::vector<MetricsRow> rows;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        rows.push_back({f[0], f[1], f[2], f[3], field_number(path, table.lines[r], "squared_bias", f[4]),
                        field_number(path, table.lines[r], "variance", f[5])});
    }
    return rows;
}

void write_json(const nlohmann::json& value, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << value.dump(2) << '\n';
    close_checked(out, path);
}

void emit_results(const analysis::StudyResult& result, const std::filesystem::path& out_dir) {
    std::vector<BetaRow> rows;
    for (const auto& e : result.entries) {
        for (Eigen::Index t = 0; t < e.mean_curve.size(); ++t) {
            rows.push_back({std::string(recovery::to_string(e.method)), e.basis.label(), e.level,
                            result.grid[static_cast<int>(t)], e.mean_curve[t], std::nullopt, std::nullopt});
        }
    }
    write_beta_csv(rows, out_dir / "beta_hat.csv");
    write_metrics_csv(result.entries, out_dir / "metrics.csv");
}

}  // namespace zisofr::io
