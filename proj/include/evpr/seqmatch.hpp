#pragma once

#include "evpr/similarity.hpp"

namespace evpr {

struct SeqConfig {
    int length = 10;          // desired sequence length L, in frames
    bool normalize = true;    // dual z-score of each query's history block
    double epsilon = 1e-8;    // floor on standard deviations
};

/// Column-wise then row-wise z-score with population standard deviation,
/// each divided by max(std, epsilon).
RowMatrix zscore_dual(const RowMatrix& c, double epsilon);

/// Fixed diagonal kernel: sum of S[q-i][j-i] for i < L. Border cells with only
/// m < L in-range terms get (partial sum) * L / m.
SimilarityMatrix seq_match_baseline(const SimilarityMatrix& s, int length);

/// Variable-length kernel over the available query history. For query q the
/// block C = S[q-N+1 .. q] with N = min(L, q+1) is optionally dual z-scored and
/// S~[q][j] is the trace of its trailing k x k diagonal block, k = min(N, j+1).
/// Row q of the output reads only rows <= q of S.
SimilarityMatrix seq_match_adaptive(const SimilarityMatrix& s, const SeqConfig& cfg);

}  // namespace evpr
