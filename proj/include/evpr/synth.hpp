#pragma once

#include <cstdint>
#include <random>

#include "evpr/events.hpp"
#include "evpr/geo.hpp"

namespace evpr {

/// Portable random source: std::mt19937_64 seeded through SplitMix64, with
/// uniform doubles taken from the top 53 bits. Identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next() { return engine_(); }
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n);  // [0, n)
    bool bernoulli(double p) { return uniform() < p; }
    double normal();  // Box-Muller, no cached pair

    static std::uint64_t splitmix64(std::uint64_t& state);

private:
    std::mt19937_64 engine_;
};

struct SynthParams {
    std::uint64_t seed = 1;
    double route_length = 1000.0;     // m
    double mean_speed = 10.0;         // m/s
    double speed_variation = 0.2;     // fraction of mean speed
    int stop_count = 0;
    double stop_duration = 5.0;       // s per stop
    double event_rate_per_meter = 400.0;
    int scene_grid = 8;               // scene generators visible per view
    double view_length = 20.0;        // m of route spanned by the sensor's columns
    double noise_rate = 0.0;          // fraction of spurious events at nominal speed
    double appearance_shift = 0.0;    // fraction of generators re-drawn
    int hot_pixels = 0;
    double hot_pixel_rate = 200.0;    // events/s per hot pixel
    SensorSize sensor{32, 24};
    double gps_rate = 10.0;           // Hz
};

/// Throws ConfigError on negative rates or fractions outside [0, 1].
void validate(const SynthParams& p);

struct Traverse {
    EventStream stream;
    GeoTrack track;
    std::size_t structural_events = 0;
    std::size_t noise_events = 0;
    double duration = 0.0;  // s
};

/// Deterministic traverse of a seeded 1-D scene. Structural events are emitted
/// in proportion to distance travelled, noise in proportion to elapsed time.
Traverse generate_traverse(const SynthParams& params);

/// Repeat traverse of `base`'s route and scene with a fraction of scene
/// generators re-drawn and an independent speed profile and noise from `seed`.
Traverse perturb_traverse(const SynthParams& base, double appearance_shift, std::uint64_t seed);

/// Position along the route for the synthetic equatorial track.
GeoPoint route_point(double progress_m);

}  // namespace evpr
