#include <doctest.h>

#include <cmath>
#include <random>

#include "evpr/error.hpp"
#include "evpr/seqmatch.hpp"
#include "oracles.hpp"

using namespace evpr;

namespace {

SimilarityMatrix scores_of(RowMatrix m) {
    SimilarityMatrix s;
    s.scores = std::move(m);
    for (Eigen::Index i = 0; i < s.queries(); ++i) s.query_timestamps.push_back(static_cast<double>(i));
    for (Eigen::Index j = 0; j < s.references(); ++j) s.ref_timestamps.push_back(static_cast<double>(j));
    return s;
}

RowMatrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::uniform_real_distribution<double> u(-2.0, 0.0);
    RowMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
    }
    return m;
}

}  // namespace

TEST_CASE("L = 1 is the identity for both matchers") {
    std::mt19937_64 rng(71);
    const auto s = scores_of(random_matrix(rng, 7, 9));
    CHECK(seq_match_baseline(s, 1).scores == s.scores);
    CHECK(seq_match_adaptive(s, {1, false, 1e-8}).scores == s.scores);
}

TEST_CASE("baseline hand example") {
    RowMatrix m(3, 3);
    m << 0, -1, -1,
        -1, 0, -1,
        -1, -1, 0;
    const auto out = seq_match_baseline(scores_of(m), 2);
    CHECK(out.scores(1, 1) == 0.0);
    CHECK(out.scores(1, 2) == -2.0);
    CHECK(out.scores(2, 2) == 0.0);
    // border: only S[0][1] in range, compensated by 2 / 1
    CHECK(out.scores(0, 1) == -2.0);
    CHECK(out.provenance.matcher == "baseline");
    CHECK(out.provenance.seq_len == 2);
}

TEST_CASE("baseline interior equals the diagonal-sum oracle") {
    std::mt19937_64 rng(73);
    const auto m = random_matrix(rng, 15, 15);
    const auto out = seq_match_baseline(scores_of(m), 5);
    for (int q = 4; q < 15; ++q) {
        for (int j = 4; j < 15; ++j) CHECK(std::abs(out.scores(q, j) - oracle::diagonal_sum(m, q, j, 5)) < 1e-9);
    }
}

TEST_CASE("adaptive without normalization equals baseline on the interior and the oracle everywhere") {
    std::mt19937_64 rng(79);
    const auto m = random_matrix(rng, 12, 12);
    const auto s = scores_of(m);
    const auto adaptive = seq_match_adaptive(s, {4, false, 1e-8});
    const auto baseline = seq_match_baseline(s, 4);
    const auto brute = oracle::adaptive(m, 4, false, 1e-8);
    for (int q = 0; q < 12; ++q) {
        for (int j = 0; j < 12; ++j) {
            if (q >= 3 && j >= 3) CHECK(std::abs(adaptive.scores(q, j) - baseline.scores(q, j)) < 1e-9);
            CHECK(std::abs(adaptive.scores(q, j) - brute(q, j)) < 1e-9);
        }
    }
    CHECK(adaptive.provenance.matcher == "adaptive_raw");
}

TEST_CASE("adaptive with normalization equals the oracle") {
    std::mt19937_64 rng(83);
    const auto m = random_matrix(rng, 20, 17);
    const auto got = seq_match_adaptive(scores_of(m), {6, true, 1e-8});
    const auto brute = oracle::adaptive(m, 6, true, 1e-8);
    CHECK((got.scores - brute).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(got.provenance.matcher == "adaptive");
    // q = 0 has a one-row history, which z-scores to zero
    CHECK(got.scores.row(0).isZero(0.0));
}

TEST_CASE("adaptive on a constant matrix is zero") {
    RowMatrix m = RowMatrix::Constant(9, 7, -0.3);
    CHECK(seq_match_adaptive(scores_of(m), {4, true, 1e-8}).scores.isZero(0.0));
}

TEST_CASE("adaptive is causal") {
    std::mt19937_64 rng(89);
    auto m = random_matrix(rng, 14, 10);
    const auto before = seq_match_adaptive(scores_of(m), {5, true, 1e-8});
    for (int j = 0; j < 10; ++j) m(10, j) += 7.0;
    const auto after = seq_match_adaptive(scores_of(m), {5, true, 1e-8});
    CHECK(before.scores.topRows(10) == after.scores.topRows(10));
    CHECK(before.scores.row(10) != after.scores.row(10));
}

TEST_CASE("zscore_dual moments") {
    std::mt19937_64 rng(97);
    for (int trial = 0; trial < 10; ++trial) {
        const auto z = zscore_dual(random_matrix(rng, 3, 4), 1e-8);
        for (int r = 0; r < 3; ++r) {
            const double mean = z.row(r).mean();
            const double sd = std::sqrt((z.row(r).array() - mean).square().mean());
            CHECK(std::abs(mean) < 1e-9);
            CHECK(std::abs(sd - 1.0) < 1e-6);
        }
    }
    CHECK(zscore_dual(RowMatrix::Constant(3, 4, 2.5), 1e-8).isZero(0.0));
    CHECK(zscore_dual(random_matrix(rng, 1, 6), 1e-8).isZero(0.0));

    const auto c = random_matrix(rng, 5, 6);
    std::vector<std::vector<double>> v(5, std::vector<double>(6));
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 6; ++j) v[i][j] = c(i, j);
    }
    oracle::zscore_columns(v, 1e-8);
    oracle::zscore_rows(v, 1e-8);
    const auto z = zscore_dual(c, 1e-8);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 6; ++j) CHECK(std::abs(z(i, j) - v[i][j]) < 1e-12);
    }
}

TEST_CASE("shape preservation and configuration errors") {
    std::mt19937_64 rng(101);
    const auto s = scores_of(random_matrix(rng, 6, 11));
    CHECK(seq_match_baseline(s, 30).scores.rows() == 6);
    CHECK(seq_match_adaptive(s, {30, true, 1e-8}).scores.cols() == 11);
    CHECK_THROWS_AS(seq_match_baseline(s, 0), ConfigError);
    CHECK_THROWS_AS(seq_match_adaptive(s, {0, true, 1e-8}), ConfigError);
    CHECK_THROWS_AS(seq_match_adaptive(s, {3, true, 0.0}), ConfigError);
}
