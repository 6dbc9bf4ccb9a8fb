#include "evpr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "evpr/error.hpp"

namespace evpr {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    engine_.seed(splitmix64(state));
}

std::uint64_t Rng::splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
    // rejection sampling keeps the draw unbiased and portable
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % n;
}

double Rng::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void validate(const SynthParams& p) {
    const auto fraction = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!(p.route_length > 0.0) || !(p.mean_speed > 0.0)) throw ConfigError("synth: route_length and mean_speed must be > 0");
    if (!fraction(p.speed_variation) || !fraction(p.noise_rate) || !fraction(p.appearance_shift)) {
        throw ConfigError("synth: fractions must lie in [0, 1]");
    }
    if (p.stop_count < 0 || p.stop_duration < 0.0 || p.event_rate_per_meter < 0.0 || p.hot_pixels < 0 ||
        p.hot_pixel_rate < 0.0) {
        throw ConfigError("synth: rates and counts must be >= 0");
    }
    if (p.scene_grid < 1 || !(p.view_length > 0.0) || !(p.gps_rate > 0.0)) throw ConfigError("synth: scene_grid, view_length and gps_rate must be positive");
    if (p.sensor.width < 2 || p.sensor.height < 2) throw ConfigError("synth: sensor must be at least 2x2");
}

GeoPoint route_point(double progress_m) {
    return {0.0, progress_m / (kEarthRadiusM * std::numbers::pi / 180.0)};
}

namespace {

// Independent random streams derived from one seed.
enum Stream : std::uint64_t { kScene = 1, kShiftPick, kShiftDraw, kSpeed, kEmit, kNoise, kHot };

// A world feature at route position `s`: while within the view it projects to a
// column band and emits events over rows [row, row + extent).
struct Generator {
    double s = 0.0;
    int row = 0;
    int extent = 1;
    double strength = 1.0;
    std::int8_t polarity = 1;
};

Generator draw_generator(Rng& rng, double slot_start, double slot_width, SensorSize sensor) {
    Generator g;
    g.s = slot_start + rng.uniform() * slot_width;
    g.extent = 1 + static_cast<int>(rng.below(std::max<std::uint64_t>(1, sensor.height / 3)));
    g.row = static_cast<int>(rng.below(static_cast<std::uint64_t>(sensor.height - g.extent + 1)));
    g.strength = rng.uniform(0.25, 1.75);
    g.polarity = rng.bernoulli(0.5) ? 1 : -1;
    return g;
}

std::vector<Generator> build_scene(const SynthParams& p) {
    Rng rng(p.seed, kScene);
    const double slot = p.view_length / p.scene_grid;
    const auto n = static_cast<std::size_t>(std::ceil((p.route_length + p.view_length) / slot));
    std::vector<Generator> scene;
    scene.reserve(n);
    for (std::size_t i = 0; i < n; ++i) scene.push_back(draw_generator(rng, static_cast<double>(i) * slot, slot, p.sensor));
    return scene;
}

void shift_scene(std::vector<Generator>& scene, const SynthParams& p, double shift, std::uint64_t seed) {
    if (shift <= 0.0) return;
    Rng pick(seed, kShiftPick), draw(seed, kShiftDraw);
    const double slot = p.view_length / p.scene_grid;
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const bool redraw = pick.bernoulli(shift);
        // draw unconditionally so generator i's replacement does not depend on earlier picks
        const Generator g = draw_generator(draw, static_cast<double>(i) * slot, slot, p.sensor);
        if (redraw) scene[i] = g;
    }
}

// Smooth speed modulation in [-1, 1]: three seeded sinusoids.
struct SpeedProfile {
    double amp[3], freq[3], phase[3];

    explicit SpeedProfile(Rng& rng) {
        for (int k = 0; k < 3; ++k) {
            amp[k] = rng.uniform(0.5, 1.0);
            freq[k] = rng.uniform(0.005, 0.05) * (k + 1);  // Hz
            phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }
    }

    double operator()(double t) const {
        double v = 0.0, norm = 0.0;
        for (int k = 0; k < 3; ++k) {
            v += amp[k] * std::sin(2.0 * std::numbers::pi * freq[k] * t + phase[k]);
            norm += amp[k];
        }
        return v / norm;
    }
};

Traverse simulate(const std::vector<Generator>& scene, const SynthParams& p, std::uint64_t seed) {
    validate(p);
    Rng speed_rng(seed, kSpeed), emit(seed, kEmit), noise(seed, kNoise), hot(seed, kHot);
    const SpeedProfile profile(speed_rng);

    std::vector<double> stops;
    for (int i = 0; i < p.stop_count; ++i) stops.push_back(p.route_length * speed_rng.uniform(0.1, 0.9));
    std::sort(stops.begin(), stops.end());

    struct HotPixel { std::uint16_t x, y; };
    std::vector<HotPixel> hot_pixels;
    for (int i = 0; i < p.hot_pixels; ++i) {
        hot_pixels.push_back({static_cast<std::uint16_t>(hot.below(p.sensor.width)),
                              static_cast<std::uint16_t>(hot.below(p.sensor.height))});
    }

    const double nominal_rate = p.event_rate_per_meter * p.mean_speed;  // structural events/s at mean speed
    const double noise_fraction = std::min(p.noise_rate, 0.99);
    const double noise_per_s = nominal_rate * noise_fraction / (1.0 - noise_fraction);

    constexpr std::int64_t kStepUs = 1000;
    constexpr double kStep = 1e-3;
    const std::int64_t gps_every = std::max<std::int64_t>(1, std::llround(1e6 / p.gps_rate / kStepUs));

    Traverse out;
    out.stream.sensor = p.sensor;
    auto& events = out.stream.events;
    const double px_per_m = static_cast<double>(p.sensor.width) / p.view_length;

    double s = 0.0, stop_left = 0.0;
    double struct_carry = 0.0, noise_carry = 0.0, hot_carry = 0.0;
    std::size_t next_stop = 0;
    std::size_t first_visible = 0;
    std::vector<const Generator*> visible;
    std::vector<double> cumulative;

    const auto emit_at = [&](std::int64_t step, Rng& rng, std::uint16_t x, std::uint16_t y, std::int8_t pol) {
        const auto us = step * kStepUs + static_cast<std::int64_t>(rng.below(kStepUs));
        events.push_back({x, y, from_microseconds(us), pol});
    };

    for (std::int64_t step = 0;; ++step) {
        const double t = from_microseconds(step * kStepUs);
        if (step % gps_every == 0) out.track.samples.push_back({t, route_point(std::min(s, p.route_length))});
        if (s >= p.route_length - 1e-9) {
            out.duration = t;
            if (out.track.samples.back().t < t) out.track.samples.push_back({t, route_point(p.route_length)});
            break;
        }

        double v = 0.0;
        if (stop_left > 0.0) {
            stop_left -= kStep;
        } else {
            v = std::max(0.0, p.mean_speed * (1.0 + p.speed_variation * profile(t)));
            // never stall completely outside scheduled stops
            v = std::max(v, 0.05 * p.mean_speed);
        }
        double ds = v * kStep;
        if (next_stop < stops.size() && s + ds >= stops[next_stop]) {
            ds = stops[next_stop] - s;
            stop_left = p.stop_duration;
            ++next_stop;
        }
        ds = std::max(0.0, std::min(ds, p.route_length - s));

        // structural events, proportional to distance
        struct_carry += p.event_rate_per_meter * ds;
        auto n_struct = static_cast<std::size_t>(struct_carry);
        struct_carry -= static_cast<double>(n_struct);
        if (n_struct > 0) {
            while (first_visible < scene.size() && scene[first_visible].s < s) ++first_visible;
            visible.clear();
            cumulative.clear();
            double total = 0.0;
            for (std::size_t i = first_visible; i < scene.size() && scene[i].s < s + p.view_length; ++i) {
                visible.push_back(&scene[i]);
                total += scene[i].strength;
                cumulative.push_back(total);
            }
            if (visible.empty()) n_struct = 0;
            for (std::size_t e = 0; e < n_struct; ++e) {
                const double u = emit.uniform() * total;
                const auto k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
                const Generator& g = *visible[std::min(k, visible.size() - 1)];
                const auto x = static_cast<std::uint16_t>(std::clamp<long>(static_cast<long>((g.s - s) * px_per_m), 0, p.sensor.width - 1));
                const auto y = static_cast<std::uint16_t>(g.row + static_cast<int>(emit.below(static_cast<std::uint64_t>(g.extent))));
                const std::int8_t pol = emit.bernoulli(0.85) ? g.polarity : static_cast<std::int8_t>(-g.polarity);
                emit_at(step, emit, x, y, pol);
            }
            out.structural_events += n_struct;
        }

        // spurious events, proportional to time
        noise_carry += noise_per_s * kStep;
        const auto n_noise = static_cast<std::size_t>(noise_carry);
        noise_carry -= static_cast<double>(n_noise);
        for (std::size_t e = 0; e < n_noise; ++e) {
            const auto x = static_cast<std::uint16_t>(noise.below(p.sensor.width));
            const auto y = static_cast<std::uint16_t>(noise.below(p.sensor.height));
            emit_at(step, noise, x, y, noise.bernoulli(0.5) ? 1 : -1);
        }
        out.noise_events += n_noise;

        if (!hot_pixels.empty()) {
            hot_carry += p.hot_pixel_rate * kStep;
            const auto n_hot = static_cast<std::size_t>(hot_carry);
            hot_carry -= static_cast<double>(n_hot);
            for (std::size_t e = 0; e < n_hot; ++e) {
                for (const auto& h : hot_pixels) emit_at(step, hot, h.x, h.y, hot.bernoulli(0.5) ? 1 : -1);
            }
        }

        s += ds;
    }

    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
    return out;
}

}  // namespace

Traverse generate_traverse(const SynthParams& params) {
    validate(params);
    auto scene = build_scene(params);
    shift_scene(scene, params, params.appearance_shift, params.seed);
    return simulate(scene, params, params.seed);
}

Traverse perturb_traverse(const SynthParams& base, double appearance_shift, std::uint64_t seed) {
    if (!(appearance_shift >= 0.0 && appearance_shift <= 1.0)) throw ConfigError("perturb_traverse: appearance_shift must lie in [0, 1]");
    validate(base);
    auto scene = build_scene(base);
    shift_scene(scene, base, appearance_shift, seed);
    return simulate(scene, base, seed);
}

}  // namespace evpr
