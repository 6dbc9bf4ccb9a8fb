#include "evpr/ensemble.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "evpr/binio.hpp"
#include "evpr/error.hpp"
#include "evpr/events.hpp"

namespace evpr {

Alignment align_members(const std::vector<std::vector<double>>& timestamps, double target_rate) {
    if (!(target_rate > 0.0)) throw ConfigError("align_members: target rate must be > 0");
    if (timestamps.empty()) throw DataError("align_members: no members");

    // integer microseconds so grid-aligned frames land exactly on ticks
    std::vector<std::vector<std::int64_t>> us(timestamps.size());
    for (std::size_t m = 0; m < timestamps.size(); ++m) {
        if (timestamps[m].empty()) throw DataError("align_members: member " + std::to_string(m) + " has no frames");
        for (double t : timestamps[m]) us[m].push_back(to_microseconds(t));
        for (std::size_t i = 1; i < us[m].size(); ++i) {
            if (us[m][i] <= us[m][i - 1]) throw DataError("align_members: member " + std::to_string(m) + " timestamps not strictly increasing");
        }
    }
    std::int64_t origin = us.front().front(), last = us.front().back();
    for (const auto& m : us) {
        origin = std::max(origin, m.front());
        last = std::min(last, m.back());
    }
    if (last < origin) throw DataError("align_members: members do not overlap in time");

    const double period_us = 1e6 / target_rate;
    const double half_period_us = period_us / 2.0;
    Alignment out;
    out.selection.resize(us.size());
    std::vector<std::size_t> picked(us.size());
    for (std::int64_t k = 0;; ++k) {
        const std::int64_t tick = origin + std::llround(static_cast<double>(k) * period_us);
        if (tick > last) break;
        bool eligible = true;
        for (std::size_t m = 0; m < us.size() && eligible; ++m) {
            const auto it = std::upper_bound(us[m].begin(), us[m].end(), tick);
            const auto idx = static_cast<std::size_t>(it - us[m].begin()) - 1;  // origin guarantees it != begin
            picked[m] = idx;
            eligible = static_cast<double>(tick - us[m][idx]) < half_period_us;
        }
        if (!eligible) continue;
        out.ticks.push_back(from_microseconds(tick));
        for (std::size_t m = 0; m < us.size(); ++m) out.selection[m].push_back(picked[m]);
    }
    return out;
}

namespace {

std::string common_or(const std::vector<const SimilarityMatrix*>& ms, std::string Provenance::*field, const char* fallback) {
    const std::string& first = ms.front()->provenance.*field;
    for (const auto* m : ms) {
        if (m->provenance.*field != first) return fallback;
    }
    return first;
}

RowMatrix zscore_global(const RowMatrix& s) {
    const double n = static_cast<double>(s.size());
    const double pivot = s(0, 0);
    const double mean = pivot + (s.array() - pivot).sum() / n;
    const double sd = std::sqrt((s.array() - mean).square().sum() / n);
    return (s.array() - mean) / std::max(sd, 1e-8);
}

}  // namespace

SimilarityMatrix fuse(const EnsembleSet& set) {
    if (set.members.empty()) throw DataError("fuse: ensemble has no members");
    const auto& first = set.members.front();
    for (const auto& m : set.members) {
        if (m.queries() != first.queries() || m.references() != first.references()) {
            throw DataError("fuse: member shape " + std::to_string(m.queries()) + "x" + std::to_string(m.references()) +
                            " differs from " + std::to_string(first.queries()) + "x" + std::to_string(first.references()));
        }
        if (set.alignment_rate > 0.0) {
            const double tol = 0.5 / set.alignment_rate;
            const auto misaligned = [tol](const std::vector<double>& a, const std::vector<double>& b) {
                if (a.size() != b.size()) return true;
                for (std::size_t i = 0; i < a.size(); ++i) {
                    if (std::abs(a[i] - b[i]) >= tol) return true;
                }
                return false;
            };
            if (misaligned(m.query_timestamps, first.query_timestamps) || misaligned(m.ref_timestamps, first.ref_timestamps)) {
                throw DataError("fuse: member '" + m.provenance.tag() + "' is not temporally aligned");
            }
        }
    }

    // Fixed accumulation order: provenance tag, then score bytes for equal tags.
    std::vector<const SimilarityMatrix*> order;
    for (const auto& m : set.members) order.push_back(&m);
    std::sort(order.begin(), order.end(), [](const SimilarityMatrix* a, const SimilarityMatrix* b) {
        const auto ta = a->provenance.tag(), tb = b->provenance.tag();
        if (ta != tb) return ta < tb;
        return std::lexicographical_compare(a->scores.data(), a->scores.data() + a->scores.size(), b->scores.data(),
                                            b->scores.data() + b->scores.size());
    });

    SimilarityMatrix out;
    out.scores = RowMatrix::Zero(first.queries(), first.references());
    for (const auto* m : order) {
        if (set.prefusion_zscore) out.scores += zscore_global(m->scores);
        else out.scores += m->scores;
    }
    out.query_timestamps = first.query_timestamps;
    out.ref_timestamps = first.ref_timestamps;
    auto& p = out.provenance;
    p.reconstruction = common_or(order, &Provenance::reconstruction, "ensemble");
    p.extractor = common_or(order, &Provenance::extractor, "ensemble");
    p.resolution = common_or(order, &Provenance::resolution, "ensemble");
    p.matcher = common_or(order, &Provenance::matcher, "mixed");
    p.fingerprint = common_or(order, &Provenance::fingerprint, "");
    p.seq_len = first.provenance.seq_len;
    for (const auto* m : order) p.members.push_back(m->provenance.tag());
    return out;
}

std::vector<Match> predict(const SimilarityMatrix& fused) { return argmax_matches(fused); }

std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::string& base_dir) {
    std::vector<ManifestEntry> out;
    std::size_t line_no = 0;
    const auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("manifest line " + std::to_string(line_no) + ": expected 'tag = path'");
        ManifestEntry e{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1)))};
        if (e.tag.empty() || e.path.empty()) throw ConfigError("manifest line " + std::to_string(line_no) + ": empty tag or path");
        if (std::filesystem::path(e.path).is_relative() && !base_dir.empty()) e.path = (std::filesystem::path(base_dir) / e.path).string();
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    const auto bytes = binio::read_file(path);
    return parse_manifest({reinterpret_cast<const char*>(bytes.data()), bytes.size()},
                          std::filesystem::path(path).parent_path().string());
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
    std::string out;
    for (const auto& e : entries) out += e.tag + " = " + e.path + "\n";
    return out;
}

}  // namespace evpr
