#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "evpr/events.hpp"

namespace evpr {

/// Real-valued reconstruction, layout [channel][row][col]. Two channels hold
/// (positive, negative) polarity; one channel is polarity-agnostic.
struct RawFrame {
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    int channels = 1;
    std::vector<double> data;
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t bin_index = 0;

    double& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
    double at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
};

/// 8-bit image, planar layout [R, G, B][row][col].
struct RenderedFrame {
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::vector<std::uint8_t> data;
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t bin_index = 0;

    std::uint8_t at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }

    friend bool operator==(const RenderedFrame&, const RenderedFrame&) = default;
};

enum class ReconMethod { CountPolarity, CountNoPolarity, TimeSurface, External };

std::string_view to_string(ReconMethod m);
ReconMethod parse_recon_method(std::string_view s);

struct ReconParams {
    ReconMethod method = ReconMethod::CountPolarity;
    double lambda = 0.0;      // time-surface decay in seconds
    double tanh_scale = 1.0;  // divisor applied before tanh
};

RawFrame event_count(const EventBin& bin, bool polarity_aware, SensorSize dims);

/// Exponential-decay time surface per polarity, referenced to
/// t_ref = t_last + lambda where t_last is the bin's final event timestamp.
RawFrame time_surface(const EventBin& bin, const ReconParams& params, SensorSize dims);

RenderedFrame normalize(const RawFrame& raw, const ReconParams& params);

/// Dispatches on params.method for the classical reconstructions.
RenderedFrame reconstruct(const EventBin& bin, const ReconParams& params, SensorSize dims);

// Frame interchange (EVPF) ------------------------------------------------

std::vector<std::uint8_t> encode_frames(const std::vector<RenderedFrame>& frames, SensorSize dims);
std::vector<RenderedFrame> decode_frames(std::span<const std::uint8_t> bytes, SensorSize expected);
void save_frames(const std::vector<RenderedFrame>& frames, SensorSize dims, const std::string& path);

/// Reads an EVPF file. `expected` with zero width accepts the file's dims.
std::vector<RenderedFrame> ingest_external_frames(const std::string& path, SensorSize expected = {});

}  // namespace evpr
