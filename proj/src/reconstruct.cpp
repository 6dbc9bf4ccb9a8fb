#include "evpr/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include "evpr/error.hpp"

namespace evpr {

namespace {

RawFrame blank(const EventBin& bin, SensorSize dims, int channels) {
    RawFrame f;
    f.width = dims.width;
    f.height = dims.height;
    f.channels = channels;
    f.data.assign(static_cast<std::size_t>(channels) * dims.width * dims.height, 0.0);
    f.t_start = bin.t_start;
    f.t_end = bin.t_end;
    f.bin_index = bin.index;
    return f;
}

void check_event(const Event& e, SensorSize dims) {
    if (e.x >= dims.width || e.y >= dims.height) {
        throw DataError("event (" + std::to_string(e.x) + ", " + std::to_string(e.y) + ") outside frame dims");
    }
}

int polarity_channel(const Event& e) { return e.p > 0 ? 0 : 1; }

}  // namespace

std::string_view to_string(ReconMethod m) {
    switch (m) {
    case ReconMethod::CountPolarity: return "count_polarity";
    case ReconMethod::CountNoPolarity: return "count_no_polarity";
    case ReconMethod::TimeSurface: return "time_surface";
    case ReconMethod::External: return "external";
    }
    return "?";
}

ReconMethod parse_recon_method(std::string_view s) {
    for (auto m : {ReconMethod::CountPolarity, ReconMethod::CountNoPolarity, ReconMethod::TimeSurface,
                   ReconMethod::External}) {
        if (s == to_string(m)) return m;
    }
    throw ConfigError("unknown reconstruction method '" + std::string(s) + "'");
}

RawFrame event_count(const EventBin& bin, bool polarity_aware, SensorSize dims) {
    if (bin.events.empty()) throw InvariantError("event_count: empty bin " + std::to_string(bin.index));
    RawFrame f = blank(bin, dims, polarity_aware ? 2 : 1);
    for (const auto& e : bin.events) {
        check_event(e, dims);
        f.at(polarity_aware ? polarity_channel(e) : 0, e.y, e.x) += 1.0;
    }
    return f;
}

RawFrame time_surface(const EventBin& bin, const ReconParams& params, SensorSize dims) {
    if (bin.events.empty()) throw InvariantError("time_surface: empty bin " + std::to_string(bin.index));
    if (!(params.lambda > 0.0)) throw ConfigError("time_surface: lambda must be > 0");

    // Most recent timestamp per (pixel, polarity); NaN marks event-free cells.
    RawFrame latest = blank(bin, dims, 2);
    std::fill(latest.data.begin(), latest.data.end(), std::nan(""));
    double t_last = bin.events.front().t;
    for (const auto& e : bin.events) {
        check_event(e, dims);
        double& cell = latest.at(polarity_channel(e), e.y, e.x);
        if (std::isnan(cell) || e.t >= cell) cell = e.t;
        t_last = std::max(t_last, e.t);
    }

    const double t_ref = t_last + params.lambda;
    RawFrame f = blank(bin, dims, 2);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        const double t = latest.data[i];
        f.data[i] = std::isnan(t) ? 0.0 : std::exp(-(t_ref - t) / params.lambda);
    }
    return f;
}

RenderedFrame normalize(const RawFrame& raw, const ReconParams& params) {
    if (!(params.tanh_scale > 0.0)) throw ConfigError("normalize: tanh_scale must be > 0");
    RenderedFrame out;
    out.width = raw.width;
    out.height = raw.height;
    out.t_start = raw.t_start;
    out.t_end = raw.t_end;
    out.bin_index = raw.bin_index;
    const std::size_t plane = static_cast<std::size_t>(raw.width) * raw.height;
    out.data.assign(3 * plane, 0);

    std::vector<std::uint8_t> levels(plane);
    std::vector<double> squashed(plane);
    for (int c = 0; c < raw.channels; ++c) {
        const double* src = raw.data.data() + static_cast<std::size_t>(c) * plane;
        for (std::size_t i = 0; i < plane; ++i) squashed[i] = std::tanh(src[i] / params.tanh_scale);
        const auto [lo_it, hi_it] = std::minmax_element(squashed.begin(), squashed.end());
        const double lo = *lo_it, hi = *hi_it;
        if (hi > lo) {
            const double scale = 255.0 / (hi - lo);
            for (std::size_t i = 0; i < plane; ++i) {
                const double v = std::floor((squashed[i] - lo) * scale + 0.5);
                levels[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            }
        } else {
            std::fill(levels.begin(), levels.end(), 0);
        }

        if (raw.channels == 1) {
            for (int k = 0; k < 3; ++k) std::copy(levels.begin(), levels.end(), out.data.begin() + k * plane);
        } else {
            // positive -> G, negative -> B, R stays zero
            std::copy(levels.begin(), levels.end(), out.data.begin() + (c + 1) * plane);
        }
    }
    return out;
}

RenderedFrame reconstruct(const EventBin& bin, const ReconParams& params, SensorSize dims) {
    switch (params.method) {
    case ReconMethod::CountPolarity: return normalize(event_count(bin, true, dims), params);
    case ReconMethod::CountNoPolarity: return normalize(event_count(bin, false, dims), params);
    case ReconMethod::TimeSurface: return normalize(time_surface(bin, params, dims), params);
    case ReconMethod::External: break;
    }
    throw ConfigError("external reconstructions are ingested from frame files, not computed from bins");
}

}  // namespace evpr
