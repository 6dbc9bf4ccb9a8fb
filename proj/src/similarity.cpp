#include "evpr/similarity.hpp"

#include <charconv>
#include <cmath>

#include "evpr/binio.hpp"
#include "evpr/error.hpp"

namespace evpr {

std::string Provenance::tag() const { return reconstruction + "/" + extractor + "/" + resolution; }

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, ptr};
}

SimilarityMatrix similarity_matrix(const DescriptorSet& query, const DescriptorSet& reference) {
    if (query.count() == 0 || reference.count() == 0) throw DataError("similarity_matrix: empty descriptor set");
    if (query.dim() != reference.dim()) {
        throw DataError("similarity_matrix: dimension mismatch (" + std::to_string(query.dim()) + " vs " +
                        std::to_string(reference.dim()) + ")");
    }
    SimilarityMatrix s;
    s.scores.resize(query.count(), reference.count());
    for (Eigen::Index q = 0; q < query.count(); ++q) {
        for (Eigen::Index j = 0; j < reference.count(); ++j) {
            s.scores(q, j) = -(query.descriptors.row(q) - reference.descriptors.row(j)).norm();
        }
    }
    s.query_timestamps = query.timestamps;
    s.ref_timestamps = reference.timestamps;
    return s;
}

std::vector<Match> argmax_matches(const SimilarityMatrix& s) {
    std::vector<Match> out;
    out.reserve(static_cast<std::size_t>(s.queries()));
    for (Eigen::Index q = 0; q < s.queries(); ++q) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < s.references(); ++j) {
            if (s.scores(q, j) > s.scores(q, best)) best = j;
        }
        out.push_back({static_cast<std::size_t>(q), static_cast<std::size_t>(best), s.scores(q, best)});
    }
    return out;
}

namespace {

std::string join_times(const std::vector<double>& ts) {
    std::string out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(to_microseconds(ts[i]));
    }
    return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    if (s.empty()) return out;
    while (true) {
        const auto pos = s.find(sep);
        out.push_back(s.substr(0, pos));
        if (pos == std::string_view::npos) break;
        s.remove_prefix(pos + 1);
    }
    return out;
}

std::vector<double> parse_times(std::string_view s) {
    std::vector<double> out;
    for (auto f : split(s, ',')) {
        std::int64_t us = 0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), us);
        if (ec != std::errc() || ptr != f.data() + f.size()) throw DataError("similarity dump: bad timestamp '" + std::string(f) + "'");
        out.push_back(from_microseconds(us));
    }
    return out;
}

}  // namespace

std::string format_similarity_csv(const SimilarityMatrix& s) {
    const auto& p = s.provenance;
    std::string out = "# evpr-similarity v1\n";
    out += "# reconstruction=" + p.reconstruction + "\n";
    out += "# extractor=" + p.extractor + "\n";
    out += "# resolution_s=" + p.resolution + "\n";
    out += "# seq_len=" + std::to_string(p.seq_len) + "\n";
    out += "# matcher=" + p.matcher + "\n";
    out += "# members=";
    for (std::size_t i = 0; i < p.members.size(); ++i) out += (i ? ";" : "") + p.members[i];
    out += "\n# fingerprint=" + p.fingerprint + "\n";
    out += "# query_us=" + join_times(s.query_timestamps) + "\n";
    out += "# ref_us=" + join_times(s.ref_timestamps) + "\n";
    for (Eigen::Index q = 0; q < s.queries(); ++q) {
        for (Eigen::Index j = 0; j < s.references(); ++j) {
            if (j) out += ',';
            out += format_double(s.scores(q, j));
        }
        out += '\n';
    }
    return out;
}

SimilarityMatrix parse_similarity_csv(std::string_view text) {
    SimilarityMatrix s;
    std::vector<std::vector<double>> rows;
    bool header_seen = false;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto body = line.substr(1);
            if (body.starts_with(' ')) body.remove_prefix(1);
            if (body == "evpr-similarity v1") {
                header_seen = true;
                continue;
            }
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) continue;
            const auto key = body.substr(0, eq);
            const std::string value(body.substr(eq + 1));
            auto& p = s.provenance;
            if (key == "reconstruction") p.reconstruction = value;
            else if (key == "extractor") p.extractor = value;
            else if (key == "resolution_s") p.resolution = value;
            else if (key == "seq_len") {
                auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), p.seq_len);
                if (ec != std::errc() || ptr != value.data() + value.size()) throw DataError("similarity dump: bad seq_len '" + value + "'");
            }
            else if (key == "matcher") p.matcher = value;
            else if (key == "members") {
                for (auto m : split(value, ';')) p.members.emplace_back(m);
            } else if (key == "fingerprint") p.fingerprint = value;
            else if (key == "query_us") s.query_timestamps = parse_times(value);
            else if (key == "ref_us") s.ref_timestamps = parse_times(value);
            continue;
        }
        std::vector<double> row;
        for (auto f : split(line, ',')) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
                throw DataError("similarity dump: bad score at line " + std::to_string(line_no));
            }
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size()) throw DataError("similarity dump: ragged row at line " + std::to_string(line_no));
        rows.push_back(std::move(row));
    }
    if (!header_seen) throw DataError("similarity dump: missing 'evpr-similarity v1' header");
    const auto Q = static_cast<Eigen::Index>(rows.size());
    const auto R = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
    if (static_cast<std::size_t>(Q) != s.query_timestamps.size() || static_cast<std::size_t>(R) != s.ref_timestamps.size()) {
        throw DataError("similarity dump: matrix shape does not match timestamp lists");
    }
    s.scores.resize(Q, R);
    for (Eigen::Index q = 0; q < Q; ++q) {
        for (Eigen::Index j = 0; j < R; ++j) s.scores(q, j) = rows[q][j];
    }
    return s;
}

std::vector<std::uint8_t> render_pgm(const RowMatrix& scores) {
    const std::string header = "P5\n" + std::to_string(scores.cols()) + " " + std::to_string(scores.rows()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const double lo = scores.size() ? scores.minCoeff() : 0.0;
    const double hi = scores.size() ? scores.maxCoeff() : 0.0;
    for (Eigen::Index q = 0; q < scores.rows(); ++q) {
        for (Eigen::Index j = 0; j < scores.cols(); ++j) {
            const double v = hi > lo ? std::floor((scores(q, j) - lo) * 255.0 / (hi - lo) + 0.5) : 0.0;
            out.push_back(static_cast<std::uint8_t>(v));
        }
    }
    return out;
}

void save_similarity_dump(const SimilarityMatrix& s, const std::string& stem, bool with_pgm) {
    binio::write_text(stem + ".csv", format_similarity_csv(s));
    if (with_pgm) binio::write_file(stem + ".pgm", render_pgm(s.scores));
}

SimilarityMatrix load_similarity_dump(const std::string& csv_path) {
    const auto bytes = binio::read_file(csv_path);
    try {
        return parse_similarity_csv({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
    } catch (const Error& e) {
        rethrow_with_context(e, csv_path);
    }
}

}  // namespace evpr
