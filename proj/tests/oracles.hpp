#pragma once

// Independent reference implementations used only by the tests. These take
// the direct (slow) route through each definition and share no code with the
// library paths they check.

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <tuple>
#include <vector>

#include "evpr/events.hpp"
#include "evpr/descriptor.hpp"

namespace oracle {

inline evpr::EventStream random_stream(std::mt19937_64& rng, std::size_t n, evpr::SensorSize sensor, double duration) {
    std::uniform_real_distribution<double> ut(0.0, duration);
    std::uniform_int_distribution<int> ux(0, sensor.width - 1), uy(0, sensor.height - 1), up(0, 1);
    evpr::EventStream s;
    s.sensor = sensor;
    for (std::size_t i = 0; i < n; ++i) {
        // microsecond-quantised like real sensor data
        const double t = std::round(ut(rng) * 1e6) * 1e-6;
        s.events.push_back({static_cast<std::uint16_t>(ux(rng)), static_cast<std::uint16_t>(uy(rng)), t,
                            static_cast<std::int8_t>(up(rng) ? 1 : -1)});
    }
    std::stable_sort(s.events.begin(), s.events.end(), [](const evpr::Event& a, const evpr::Event& b) { return a.t < b.t; });
    return s;
}

inline std::vector<std::vector<evpr::Event>> chunk(const std::vector<evpr::Event>& ev, std::size_t n) {
    std::vector<std::vector<evpr::Event>> out;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (i % n == 0) out.emplace_back();
        out.back().push_back(ev[i]);
    }
    return out;
}

/// Bin index by floor((t - t0) / dt), confirmed by testing the candidate
/// windows [t0 + i dt, t0 + (i+1) dt) around it. Returns SIZE_MAX if none holds t.
inline std::size_t interval_bin(double t, double dt, double t0) {
    const auto guess = static_cast<std::int64_t>(std::floor((t - t0) / dt));
    for (std::int64_t i = std::max<std::int64_t>(0, guess - 2); i <= guess + 2; ++i) {
        const double lo = t0 + static_cast<double>(i) * dt;
        const double hi = t0 + static_cast<double>(i + 1) * dt;
        if (lo <= t && t < hi) return static_cast<std::size_t>(i);
    }
    return SIZE_MAX;
}

using CellKey = std::tuple<int, int, int>;  // x, y, polarity

inline std::map<CellKey, double> tally(const std::vector<evpr::Event>& ev) {
    std::map<CellKey, double> m;
    for (const auto& e : ev) m[{e.x, e.y, e.p}] += 1.0;
    return m;
}

inline std::map<CellKey, double> time_surface(const std::vector<evpr::Event>& ev, double lambda) {
    double t_end = -1e300;
    for (const auto& e : ev) t_end = std::max(t_end, e.t);
    std::map<CellKey, double> last;
    for (const auto& e : ev) {
        auto it = last.find({e.x, e.y, e.p});
        if (it == last.end()) last[{e.x, e.y, e.p}] = e.t;
        else it->second = std::max(it->second, e.t);
    }
    std::map<CellKey, double> out;
    for (const auto& [k, t] : last) out[k] = std::exp(-((t_end + lambda) - t) / lambda);
    return out;
}

inline evpr::RowMatrix distance_scores(const evpr::RowMatrix& q, const evpr::RowMatrix& r) {
    evpr::RowMatrix s(q.rows(), r.rows());
    for (int i = 0; i < q.rows(); ++i) {
        for (int j = 0; j < r.rows(); ++j) {
            double ss = 0.0;
            for (int d = 0; d < q.cols(); ++d) ss += (q(i, d) - r(j, d)) * (q(i, d) - r(j, d));
            s(i, j) = -std::sqrt(ss);
        }
    }
    return s;
}

/// Full-length diagonal sum, defined only where q, j >= L-1.
inline double diagonal_sum(const evpr::RowMatrix& s, int q, int j, int L) {
    double sum = 0.0;
    for (int i = 0; i < L; ++i) sum += s(q - i, j - i);
    return sum;
}

inline void zscore_columns(std::vector<std::vector<double>>& m, double eps) {
    const std::size_t rows = m.size(), cols = m[0].size();
    for (std::size_t c = 0; c < cols; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < rows; ++r) mean += m[r][c];
        mean /= static_cast<double>(rows);
        double var = 0.0;
        for (std::size_t r = 0; r < rows; ++r) var += (m[r][c] - mean) * (m[r][c] - mean);
        const double sd = std::max(std::sqrt(var / static_cast<double>(rows)), eps);
        for (std::size_t r = 0; r < rows; ++r) m[r][c] = (m[r][c] - mean) / sd;
    }
}

inline void zscore_rows(std::vector<std::vector<double>>& m, double eps) {
    for (auto& row : m) {
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= static_cast<double>(row.size());
        double var = 0.0;
        for (double v : row) var += (v - mean) * (v - mean);
        const double sd = std::max(std::sqrt(var / static_cast<double>(row.size())), eps);
        for (double& v : row) v = (v - mean) / sd;
    }
}

/// Literal transcription of the adaptive matcher: materialise C, optionally
/// normalise, then sum the diagonal of C[N-k:N, j-k+1:j+1].
inline evpr::RowMatrix adaptive(const evpr::RowMatrix& s, int L, bool normalize, double eps) {
    const int Q = static_cast<int>(s.rows()), R = static_cast<int>(s.cols());
    evpr::RowMatrix out(Q, R);
    for (int q = 0; q < Q; ++q) {
        const int N = std::min(L, q + 1);
        std::vector<std::vector<double>> C(N, std::vector<double>(R));
        for (int r = 0; r < N; ++r) {
            for (int j = 0; j < R; ++j) C[r][j] = s(q - N + 1 + r, j);
        }
        if (normalize) {
            zscore_columns(C, eps);
            zscore_rows(C, eps);
        }
        for (int j = 0; j < R; ++j) {
            const int k = std::min(N, j + 1);
            double tr = 0.0;
            for (int d = 0; d < k; ++d) tr += C[N - k + d][j - k + 1 + d];
            out(q, j) = tr;
        }
    }
    return out;
}

/// Per-tick linear scan for the latest frame at or before each tick, all in
/// integer microseconds. Returns selections per member (ticks dropped when a
/// member's latest frame is half a period old or more).
inline std::vector<std::vector<std::size_t>> align(const std::vector<std::vector<std::int64_t>>& us, std::int64_t period_us) {
    std::int64_t origin = 0, last = INT64_MAX;
    for (const auto& m : us) {
        origin = std::max(origin, m.front());
        last = std::min(last, m.back());
    }
    std::vector<std::vector<std::size_t>> sel(us.size());
    for (std::int64_t tick = origin; tick <= last; tick += period_us) {
        std::vector<std::size_t> row;
        bool ok = true;
        for (const auto& m : us) {
            std::size_t best = 0;
            for (std::size_t i = 0; i < m.size(); ++i) {
                if (m[i] <= tick) best = i;
            }
            ok = ok && 2 * (tick - m[best]) < period_us;
            row.push_back(best);
        }
        if (!ok) continue;
        for (std::size_t k = 0; k < us.size(); ++k) sel[k].push_back(row[k]);
    }
    return sel;
}

/// Student-t density, closed form.
inline double t_density(double x, int dof) {
    const double v = dof;
    return std::exp(std::lgamma((v + 1) / 2) - std::lgamma(v / 2)) / std::sqrt(v * std::numbers::pi) *
           std::pow(1 + x * x / v, -(v + 1) / 2);
}

/// Two-sided p = 1 - integral_{-|t|}^{|t|} density, by composite trapezoid.
inline double t_two_sided_p(double t, int dof) {
    const double a = std::abs(t);
    if (a == 0.0) return 1.0;
    const int n = 400000;
    const double h = 2 * a / n;
    double sum = 0.5 * (t_density(-a, dof) + t_density(a, dof));
    for (int i = 1; i < n; ++i) sum += t_density(-a + i * h, dof);
    return std::max(0.0, 1.0 - sum * h);
}

/// Paired t statistic computed straight from the textbook formula.
inline double paired_t(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mean += (a[i] - b[i]) / n;
    double var = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) var += (a[i] - b[i] - mean) * (a[i] - b[i] - mean);
    var /= n - 1;
    return mean / std::sqrt(var / n);
}

}  // namespace oracle
