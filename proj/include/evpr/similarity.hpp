#pragma once

#include <string>
#include <vector>

#include "evpr/descriptor.hpp"

namespace evpr {

/// Where a similarity matrix came from. `members` is filled for fused matrices.
struct Provenance {
    std::string reconstruction;
    std::string extractor;
    std::string resolution;  // seconds, textual as configured
    int seq_len = 1;
    std::string matcher = "none";
    std::vector<std::string> members;
    std::string fingerprint;

    /// reconstruction/extractor/resolution, the ensemble member key.
    std::string tag() const;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SimilarityMatrix {
    RowMatrix scores;  // Q x R, higher is more similar
    std::vector<double> query_timestamps;
    std::vector<double> ref_timestamps;
    Provenance provenance;

    Eigen::Index queries() const { return scores.rows(); }
    Eigen::Index references() const { return scores.cols(); }
};

struct Match {
    std::size_t q = 0;
    std::size_t j = 0;
    double score = 0.0;

    friend bool operator==(const Match&, const Match&) = default;
};

/// scores[q][j] = -||d_q - d_j||_2
SimilarityMatrix similarity_matrix(const DescriptorSet& query, const DescriptorSet& reference);

/// Per row, the lowest column index attaining the row maximum.
std::vector<Match> argmax_matches(const SimilarityMatrix& s);

// Dumps: a self-describing CSV of raw scores (lossless) plus an optional PGM.
std::string format_similarity_csv(const SimilarityMatrix& s);
SimilarityMatrix parse_similarity_csv(std::string_view text);
std::vector<std::uint8_t> render_pgm(const RowMatrix& scores);

/// Writes `<stem>.csv` and, if requested, `<stem>.pgm`.
void save_similarity_dump(const SimilarityMatrix& s, const std::string& stem, bool with_pgm);
SimilarityMatrix load_similarity_dump(const std::string& csv_path);

std::string format_double(double v);

}  // namespace evpr
