#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evpr/events.hpp"
#include "evpr/geo.hpp"
#include "evpr/similarity.hpp"
#include "evpr/stats.hpp"

namespace evpr {

inline constexpr double kDefaultToleranceM = 25.0;

struct MatchRecord {
    std::size_t q = 0;
    double q_time = 0.0;
    std::size_t j = 0;
    double ref_time = 0.0;
    double score = 0.0;
    double distance_m = 0.0;  // NaN when either frame has no ground-truth position
    bool correct = false;
};

struct RecallResult {
    std::vector<MatchRecord> records;
    std::size_t n_queries = 0;
    std::size_t n_correct = 0;
    std::size_t n_unpositioned = 0;  // matches lacking a position on either side
    double recall = 0.0;             // NaN for zero queries
};

/// A match is correct iff both frames have positions and their distance is
/// within `tolerance_m`. Unpositioned queries stay in the denominator.
RecallResult recall_at_1(const std::vector<Match>& matches, const std::vector<std::optional<GeoPoint>>& query_positions,
                         const std::vector<std::optional<GeoPoint>>& ref_positions, double tolerance_m = kDefaultToleranceM);

struct BinTravel {
    std::size_t bin_index = 0;
    double distance_m = 0.0;
};

struct TravelStats {
    std::vector<BinTravel> bins;  // bins with both bounds inside the track span
    std::size_t excluded = 0;
    double mean_m = 0.0;
    double std_m = 0.0;  // population
};

/// Distance between interpolated positions at each bin's start and end.
TravelStats bin_travel_stats(const GeoTrack& track, const std::vector<EventBin>& bins);

struct Comparison {
    std::string a;
    std::string b;
    std::size_t n = 0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double t = 0.0;
    double p = 1.0;

    friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct MemberRecall {
    std::string tag;
    double recall = 0.0;

    friend bool operator==(const MemberRecall&, const MemberRecall&) = default;
};

struct EvalReport {
    double recall = 0.0;
    double tolerance_m = kDefaultToleranceM;
    std::size_t n_queries = 0;
    std::size_t n_correct = 0;
    std::string group;
    Provenance provenance;
    std::vector<MatchRecord> matches;
    std::vector<MemberRecall> members;
    std::vector<Comparison> comparisons;
};

EvalReport make_report(const SimilarityMatrix& s, const RecallResult& r, double tolerance_m, std::string group);

/// Paired t-test over recalls of reports paired by position; names the sides.
Comparison compare(const std::string& name_a, const std::vector<double>& a, const std::string& name_b,
                   const std::vector<double>& b);

std::string format_report_csv(const EvalReport& report);
std::string format_summary_json(const EvalReport& report);
EvalReport parse_summary_json(std::string_view text);

/// Writes `<stem>.csv` and `<stem>.json`.
void emit_report(const EvalReport& report, const std::string& stem);
EvalReport load_summary(const std::string& json_path);

}  // namespace evpr
