#include "evpr/seqmatch.hpp"

#include <algorithm>
#include <cmath>

#include "evpr/error.hpp"

namespace evpr {

namespace {

// Standardises a strided vector in place. The mean is taken about the first
// element so constant inputs give exactly zero deviations.
template <typename Vec>
void standardize(Vec&& v, double epsilon) {
    const Eigen::Index n = v.size();
    const double pivot = v[0];
    double shift = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) shift += v[i] - pivot;
    const double mean = pivot + shift / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = v[i] - mean;
        ss += d * d;
    }
    const double denom = std::max(std::sqrt(ss / static_cast<double>(n)), epsilon);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = (v[i] - mean) / denom;
}

void check(const SeqConfig& cfg) {
    if (cfg.length < 1) throw ConfigError("sequence length must be >= 1");
    if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
}

SimilarityMatrix like(const SimilarityMatrix& s, int length, const char* matcher) {
    SimilarityMatrix out;
    out.scores.resize(s.queries(), s.references());
    out.query_timestamps = s.query_timestamps;
    out.ref_timestamps = s.ref_timestamps;
    out.provenance = s.provenance;
    out.provenance.seq_len = length;
    out.provenance.matcher = matcher;
    return out;
}

}  // namespace

RowMatrix zscore_dual(const RowMatrix& c, double epsilon) {
    if (c.size() == 0) throw InvariantError("zscore_dual: empty matrix");
    RowMatrix out = c;
    for (Eigen::Index j = 0; j < out.cols(); ++j) standardize(out.col(j), epsilon);
    for (Eigen::Index i = 0; i < out.rows(); ++i) standardize(out.row(i), epsilon);
    return out;
}

SimilarityMatrix seq_match_baseline(const SimilarityMatrix& s, int length) {
    if (length < 1) throw ConfigError("sequence length must be >= 1");
    SimilarityMatrix out = like(s, length, "baseline");
    const Eigen::Index L = length;
    for (Eigen::Index q = 0; q < s.queries(); ++q) {
        for (Eigen::Index j = 0; j < s.references(); ++j) {
            const Eigen::Index m = std::min({L, q + 1, j + 1});
            double sum = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) sum += s.scores(q - i, j - i);
            out.scores(q, j) = m == L ? sum : sum * static_cast<double>(L) / static_cast<double>(m);
        }
    }
    return out;
}

SimilarityMatrix seq_match_adaptive(const SimilarityMatrix& s, const SeqConfig& cfg) {
    check(cfg);
    SimilarityMatrix out = like(s, cfg.length, cfg.normalize ? "adaptive" : "adaptive_raw");
    const Eigen::Index L = cfg.length;
    RowMatrix block;
    for (Eigen::Index q = 0; q < s.queries(); ++q) {
        const Eigen::Index n = std::min(L, q + 1);
        block = s.scores.middleRows(q - n + 1, n);
        if (cfg.normalize) block = zscore_dual(block, cfg.epsilon);
        for (Eigen::Index j = 0; j < s.references(); ++j) {
            const Eigen::Index k = std::min(n, j + 1);
            // running diagonal sum ending at (n-1, j)
            double trace = 0.0;
            for (Eigen::Index i = 0; i < k; ++i) trace += block(n - 1 - i, j - i);
            out.scores(q, j) = trace;
        }
    }
    return out;
}

}  // namespace evpr
