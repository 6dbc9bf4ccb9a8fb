#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evpr {

struct GeoPoint {
    double lat = 0.0;  // degrees
    double lon = 0.0;  // degrees

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct GeoSample {
    double t = 0.0;  // seconds
    GeoPoint pos;

    friend bool operator==(const GeoSample&, const GeoSample&) = default;
};

/// Strictly time-ordered GPS fixes.
struct GeoTrack {
    std::vector<GeoSample> samples;

    double first_time() const { return samples.front().t; }
    double last_time() const { return samples.back().t; }
};

inline constexpr double kEarthRadiusM = 6371000.0;

/// Haversine great-circle distance on a sphere of radius kEarthRadiusM.
double geo_distance(const GeoPoint& a, const GeoPoint& b);

/// Throws DataError on non-increasing timestamps or out-of-range coordinates.
void validate(const GeoTrack& track);

/// Piecewise-linear lat/lon interpolation. Timestamps outside the track span
/// yield nullopt.
std::optional<GeoPoint> interpolate_position(const GeoTrack& track, double t);
std::vector<std::optional<GeoPoint>> interpolate_positions(const GeoTrack& track, std::span<const double> timestamps);

/// `t,lat,lon` rows; `# units=us|s` selects the timestamp unit (seconds by default).
GeoTrack parse_gps_csv(std::string_view text);
GeoTrack load_gps(const std::string& path);
std::string format_gps_csv(const GeoTrack& track);

}  // namespace evpr
