#include "evpr/geo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "evpr/binio.hpp"
#include "evpr/error.hpp"
#include "evpr/events.hpp"
#include "evpr/similarity.hpp"

namespace evpr {

double geo_distance(const GeoPoint& a, const GeoPoint& b) {
    constexpr double kDeg = std::numbers::pi / 180.0;
    const double dlat = (b.lat - a.lat) * kDeg;
    const double dlon = (b.lon - a.lon) * kDeg;
    const double s = std::sin(dlat / 2.0), c = std::sin(dlon / 2.0);
    const double h = s * s + std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * c * c;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

void validate(const GeoTrack& track) {
    for (std::size_t i = 0; i < track.samples.size(); ++i) {
        const auto& s = track.samples[i];
        if (!(std::abs(s.pos.lat) <= 90.0) || !(std::abs(s.pos.lon) <= 180.0)) {
            throw DataError("GPS sample " + std::to_string(i) + ": coordinates out of range");
        }
        if (i > 0 && !(s.t > track.samples[i - 1].t)) throw DataError("GPS sample " + std::to_string(i) + ": timestamps not strictly increasing");
    }
}

std::optional<GeoPoint> interpolate_position(const GeoTrack& track, double t) {
    const auto& s = track.samples;
    if (s.empty() || t < s.front().t || t > s.back().t) return std::nullopt;
    auto hi = std::lower_bound(s.begin(), s.end(), t, [](const GeoSample& a, double v) { return a.t < v; });
    if (hi->t == t) return hi->pos;
    const auto lo = hi - 1;
    const double w = (t - lo->t) / (hi->t - lo->t);
    return GeoPoint{lo->pos.lat + w * (hi->pos.lat - lo->pos.lat), lo->pos.lon + w * (hi->pos.lon - lo->pos.lon)};
}

std::vector<std::optional<GeoPoint>> interpolate_positions(const GeoTrack& track, std::span<const double> timestamps) {
    std::vector<std::optional<GeoPoint>> out;
    out.reserve(timestamps.size());
    for (double t : timestamps) out.push_back(interpolate_position(track, t));
    return out;
}

GeoTrack parse_gps_csv(std::string_view text) {
    GeoTrack track;
    bool micro = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (line.find("units=us") != std::string_view::npos) micro = true;
            else if (line.find("units=s") != std::string_view::npos) micro = false;
            continue;
        }
        double v[3];
        std::size_t n = 0;
        for (std::string_view rest = line; n < 3;) {
            const auto comma = rest.find(',');
            auto f = rest.substr(0, comma);
            while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[n]);
            if (ec != std::errc() || ptr != f.data() + f.size()) throw DataError("GPS line " + std::to_string(line_no) + ": bad number");
            ++n;
            if (comma == std::string_view::npos) {
                if (n != 3) throw DataError("GPS line " + std::to_string(line_no) + ": expected 't,lat,lon'");
                break;
            }
            rest = rest.substr(comma + 1);
            if (n == 3) throw DataError("GPS line " + std::to_string(line_no) + ": expected 't,lat,lon'");
        }
        track.samples.push_back({micro ? from_microseconds(static_cast<std::int64_t>(std::llround(v[0]))) : v[0], {v[1], v[2]}});
    }
    validate(track);
    return track;
}

GeoTrack load_gps(const std::string& path) {
    const auto bytes = binio::read_file(path);
    try {
        return parse_gps_csv({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
    } catch (const Error& e) {
        rethrow_with_context(e, path);
    }
}

std::string format_gps_csv(const GeoTrack& track) {
    std::string out = "# units=us\n";
    for (const auto& s : track.samples) {
        out += std::to_string(to_microseconds(s.t)) + "," + format_double(s.pos.lat) + "," + format_double(s.pos.lon) + "\n";
    }
    return out;
}

}  // namespace evpr
