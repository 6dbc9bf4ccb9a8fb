#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "evpr/binio.hpp"
#include "evpr/ensemble.hpp"
#include "evpr/error.hpp"
#include "evpr/events.hpp"
#include "oracles.hpp"

using namespace evpr;

namespace {

std::vector<double> grid(double start, double step, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(from_microseconds(to_microseconds(start + i * step)));
    return out;
}

SimilarityMatrix member(std::mt19937_64& rng, int q, int r, const std::string& recon, const std::string& res) {
    std::uniform_real_distribution<double> u(-2.0, 0.0);
    SimilarityMatrix s;
    s.scores.resize(q, r);
    for (int i = 0; i < q; ++i) {
        for (int j = 0; j < r; ++j) s.scores(i, j) = u(rng);
    }
    s.query_timestamps = grid(1.0, 1.0, q);
    s.ref_timestamps = grid(1.0, 1.0, r);
    s.provenance = {recon, "builtin", res, 10, "adaptive", {}, "fp"};
    return s;
}

}  // namespace

TEST_CASE("align_members on uniform grids") {
    SUBCASE("0.1 s member at 1 Hz keeps every 10th frame") {
        const auto a = align_members({grid(0.1, 0.1, 100)}, 1.0);
        REQUIRE(a.ticks.size() == 10);
        for (std::size_t k = 0; k < 10; ++k) CHECK(a.selection[0][k] == 10 * k);
    }
    SUBCASE("0.25 s and 1.0 s members reduce to the 1 Hz count") {
        const auto a = align_members({grid(0.25, 0.25, 40), grid(1.0, 1.0, 10)}, 1.0);
        REQUIRE(a.ticks.size() == 10);
        REQUIRE(a.selection[0].size() == a.selection[1].size());
        for (std::size_t k = 0; k < 10; ++k) {
            CHECK(a.selection[0][k] == 3 + 4 * k);
            CHECK(a.selection[1][k] == k);
        }
    }
    CHECK_THROWS_AS(align_members({grid(0.0, 1.0, 3), grid(10.0, 1.0, 3)}, 1.0), DataError);
    CHECK_THROWS_AS(align_members({grid(0.0, 1.0, 3)}, 0.0), ConfigError);
    CHECK_THROWS_AS(align_members({{0.0, 2.0, 1.0}}, 1.0), DataError);
}

TEST_CASE("align_members with jitter matches the linear-scan oracle") {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> jitter(-0.04, 0.04), gap(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<double>> ts;
        std::vector<std::vector<std::int64_t>> us;
        for (double step : {0.1, 0.25, 0.5}) {
            std::vector<double> t;
            std::vector<std::int64_t> u;
            for (int i = 0; i < static_cast<int>(30.0 / step); ++i) {
                if (gap(rng) < 0.1) continue;  // dropouts
                const std::int64_t v = to_microseconds(1.0 + i * step + jitter(rng) * step);
                if (!u.empty() && v <= u.back()) continue;
                u.push_back(v);
                t.push_back(from_microseconds(v));
            }
            ts.push_back(t);
            us.push_back(u);
        }
        const auto a = align_members(ts, 1.0);
        const auto o = oracle::align(us, 1000000);
        CHECK(a.selection == o);
        for (std::size_t m = 0; m < ts.size(); ++m) {
            for (std::size_t k = 0; k < a.ticks.size(); ++k) {
                CHECK(std::abs(ts[m][a.selection[m][k]] - a.ticks[k]) < 0.5);
            }
        }
    }
}

TEST_CASE("fuse identities") {
    std::mt19937_64 rng(107);
    const auto a = member(rng, 6, 6, "count_polarity", "0.25");
    CHECK(fuse({{a}}).scores == a.scores);

    const auto doubled = fuse({{a, a}});
    CHECK(doubled.scores == 2.0 * a.scores);
    CHECK(predict(doubled) != std::vector<Match>{});
    const auto single = argmax_matches(a);
    const auto fused = predict(doubled);
    for (std::size_t i = 0; i < single.size(); ++i) CHECK(fused[i].j == single[i].j);

    for (int copies = 1; copies <= 5; ++copies) {
        EnsembleSet set;
        for (int c = 0; c < copies; ++c) set.members.push_back(a);
        const auto m = predict(fuse(set));
        for (std::size_t i = 0; i < single.size(); ++i) CHECK(m[i].j == single[i].j);
    }
}

TEST_CASE("fuse matches the element-loop oracle and is order-independent") {
    std::mt19937_64 rng(109);
    const auto a = member(rng, 6, 6, "count_polarity", "0.25");
    const auto b = member(rng, 6, 6, "time_surface", "1");
    const auto f = fuse({{a, b}});
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) CHECK(std::abs(f.scores(i, j) - (a.scores(i, j) + b.scores(i, j))) < 1e-12);
    }
    CHECK(f.provenance.members == std::vector<std::string>{"count_polarity/builtin/0.25", "time_surface/builtin/1"});
    CHECK(f.provenance.reconstruction == "ensemble");
    CHECK(f.provenance.extractor == "builtin");

    std::vector<SimilarityMatrix> ms{a, b, member(rng, 6, 6, "count_no_polarity", "0.5"),
                                     member(rng, 6, 6, "count_polarity", "1")};
    const auto reference = fuse({ms}).scores;
    std::sort(ms.begin(), ms.end(), [](const auto& x, const auto& y) { return x.provenance.tag() < y.provenance.tag(); });
    do {
        CHECK(fuse({ms}).scores == reference);
    } while (std::next_permutation(ms.begin(), ms.end(), [](const auto& x, const auto& y) {
        return x.provenance.tag() < y.provenance.tag();
    }));
}

TEST_CASE("fuse rejects mismatched members") {
    std::mt19937_64 rng(113);
    const auto a = member(rng, 6, 6, "a", "1");
    CHECK_THROWS_AS(fuse({{a, member(rng, 5, 6, "b", "1")}}), DataError);
    auto shifted = member(rng, 6, 6, "b", "1");
    for (auto& t : shifted.query_timestamps) t += 0.6;
    CHECK_THROWS_AS(fuse({{a, shifted}}), DataError);
    CHECK_THROWS_AS(fuse({}), DataError);
}

TEST_CASE("prefusion z-score ablation") {
    std::mt19937_64 rng(127);
    const auto a = member(rng, 5, 5, "a", "1");
    EnsembleSet set{{a}, 1.0, true};
    const auto z = fuse(set).scores;
    CHECK(std::abs(z.mean()) < 1e-12);
    CHECK(std::abs(std::sqrt((z.array() - z.mean()).square().mean()) - 1.0) < 1e-9);
}

TEST_CASE("manifest parsing") {
    const auto entries = parse_manifest("# members\ncount_polarity/builtin/1 = a.csv\n\n  x/y/z=/abs/b.csv  \n", "/base");
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].tag == "count_polarity/builtin/1");
    CHECK(entries[0].path == "/base/a.csv");
    CHECK(entries[1].path == "/abs/b.csv");
    CHECK(parse_manifest(format_manifest(entries), "").size() == 2);
    CHECK_THROWS_AS(parse_manifest("no equals sign\n", ""), ConfigError);
    CHECK_THROWS_AS(parse_manifest(" = x\n", ""), ConfigError);
}
