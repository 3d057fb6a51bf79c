#include "zisofr/dataset.hpp"

#include <cstring>
#include <sstream>

#include "zisofr/errors.hpp"

namespace zisofr {

std::string_view to_string(Family family) {
    return family == Family::gaussian ? "gaussian" : "bernoulli";
}

Family parse_family(std::string_view name) {
    if (name == "gaussian") return Family::gaussian;
    if (name == "bernoulli") return Family::bernoulli;
    throw ParameterDomainError("unknown family '" + std::string(name) +
                               "' (expected gaussian or bernoulli)");
}

Eigen::MatrixXd Dataset::covariates() const {
    Eigen::MatrixXd z(n(), covariate_count());
    for (int i = 0; i < n(); ++i) {
        z.row(i) = subjects[static_cast<std::size_t>(i)].z.transpose();
    }
    return z;
}

Eigen::VectorXd Dataset::outcomes() const {
    Eigen::VectorXd y(n());
    for (int i = 0; i < n(); ++i) {
        y[i] = subjects[static_cast<std::size_t>(i)].y;
    }
    return y;
}

Dataset Dataset::resample(const std::vector<int>& rows) const {
    Dataset out{grid, covariate_names, {}};
    out.subjects.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        SubjectRecord rec = subjects.at(static_cast<std::size_t>(rows[k]));
        rec.id += "#" + std::to_string(k);
        out.subjects.push_back(std::move(rec));
    }
    return out;
}

void Dataset::validate() const {
    const int p = covariate_count();
    for (const auto& s : subjects) {
        std::ostringstream where;
        where << "subject '" << s.id << "': ";
        if (s.z.size() != p) {
            throw DataError(where.str() + "covariate count does not match header");
        }
        if (s.w.rows() < 1) {
            throw DataError(where.str() + "no replicates");
        }
        if (s.w.cols() != m()) {
            throw DataError(where.str() + "proxy curves do not match the grid length");
        }
        if (!s.w.allFinite() || !s.z.allFinite() || !std::isfinite(s.y)) {
            throw DataError(where.str() + "non-finite value");
        }
    }
}

namespace {

struct Fnv1a {
    std::uint64_t state = 0xcbf29ce484222325ULL;

    void bytes(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t k = 0; k < len; ++k) {
            state ^= p[k];
            state *= 0x100000001b3ULL;
        }
    }
    void value(double v) { bytes(&v, sizeof v); }
    void value(std::int64_t v) { bytes(&v, sizeof v); }
};

}  // namespace

std::uint64_t content_hash(const Dataset& data) {
    Fnv1a h;
    for (double t : data.grid.points()) h.value(t);
    h.value(static_cast<std::int64_t>(data.n()));
    for (const auto& s : data.subjects) {
        h.bytes(s.id.data(), s.id.size());
        h.value(s.y);
        for (Eigen::Index k = 0; k < s.z.size(); ++k) h.value(s.z[k]);
        h.value(static_cast<std::int64_t>(s.w.rows()));
        for (Eigen::Index r = 0; r < s.w.rows(); ++r)
            for (Eigen::Index c = 0; c < s.w.cols(); ++c) h.value(s.w(r, c));
    }
    return h.state;
}

}  // namespace zisofr
