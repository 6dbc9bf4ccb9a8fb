#include "evpr/eval.hpp"

#include <cmath>
#include <limits>

#include "evpr/error.hpp"

namespace evpr {

RecallResult recall_at_1(const std::vector<Match>& matches, const std::vector<std::optional<GeoPoint>>& query_positions,
                         const std::vector<std::optional<GeoPoint>>& ref_positions, double tolerance_m) {
    RecallResult r;
    r.n_queries = matches.size();
    for (const auto& m : matches) {
        MatchRecord rec;
        rec.q = m.q;
        rec.j = m.j;
        rec.score = m.score;
        rec.distance_m = std::numeric_limits<double>::quiet_NaN();
        const bool have_q = m.q < query_positions.size() && query_positions[m.q];
        const bool have_j = m.j < ref_positions.size() && ref_positions[m.j];
        if (have_q && have_j) {
            rec.distance_m = geo_distance(*query_positions[m.q], *ref_positions[m.j]);
            rec.correct = rec.distance_m <= tolerance_m;
        } else {
            ++r.n_unpositioned;
        }
        r.n_correct += rec.correct ? 1 : 0;
        r.records.push_back(rec);
    }
    r.recall = r.n_queries ? static_cast<double>(r.n_correct) / static_cast<double>(r.n_queries)
                           : std::numeric_limits<double>::quiet_NaN();
    return r;
}

TravelStats bin_travel_stats(const GeoTrack& track, const std::vector<EventBin>& bins) {
    TravelStats st;
    for (const auto& b : bins) {
        const auto a = interpolate_position(track, b.t_start);
        const auto e = interpolate_position(track, b.t_end);
        if (!a || !e) {
            ++st.excluded;
            continue;
        }
        st.bins.push_back({b.index, geo_distance(*a, *e)});
    }
    if (!st.bins.empty()) {
        const double n = static_cast<double>(st.bins.size());
        double sum = 0.0;
        for (const auto& b : st.bins) sum += b.distance_m;
        st.mean_m = sum / n;
        double ss = 0.0;
        for (const auto& b : st.bins) ss += (b.distance_m - st.mean_m) * (b.distance_m - st.mean_m);
        st.std_m = std::sqrt(ss / n);
    }
    return st;
}

EvalReport make_report(const SimilarityMatrix& s, const RecallResult& r, double tolerance_m, std::string group) {
    EvalReport rep;
    rep.recall = r.recall;
    rep.tolerance_m = tolerance_m;
    rep.n_queries = r.n_queries;
    rep.n_correct = r.n_correct;
    rep.group = std::move(group);
    rep.provenance = s.provenance;
    rep.matches = r.records;
    for (auto& m : rep.matches) {
        m.q_time = s.query_timestamps.at(m.q);
        m.ref_time = s.ref_timestamps.at(m.j);
    }
    return rep;
}

Comparison compare(const std::string& name_a, const std::vector<double>& a, const std::string& name_b,
                   const std::vector<double>& b) {
    const auto t = paired_t_test(a, b);
    Comparison c;
    c.a = name_a;
    c.b = name_b;
    c.n = a.size();
    for (double v : a) c.mean_a += v / static_cast<double>(a.size());
    for (double v : b) c.mean_b += v / static_cast<double>(b.size());
    c.t = t.t;
    c.p = t.p;
    return c;
}

}  // namespace evpr
