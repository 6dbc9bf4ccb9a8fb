#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evpr/reconstruct.hpp"
#include "evpr/seqmatch.hpp"
#include "evpr/synth.hpp"

namespace evpr {

struct InputConfig {
    std::string mode = "synth";  // synth | files
    std::string query_events, reference_events;
    std::string query_gps, reference_gps;
    std::string query_frames, reference_frames;  // EVPF, for the `external` reconstruction
    SensorSize sensor{};                          // 0x0: take from the data
};

struct SynthPairConfig {
    SynthParams reference;             // appearance_shift here applies to the query
    std::uint64_t query_seed = 2;
};

struct BinningConfig {
    std::string mode = "time";  // time | count
    std::vector<double> resolutions{1.0};
    std::vector<std::size_t> counts{5000};
    std::optional<double> t0;       // default: first event of each traverse
    double hot_pixel_multiple = 10.0;  // 0 disables suppression
};

struct ReconConfig {
    std::vector<ReconMethod> methods{ReconMethod::CountPolarity};
    std::optional<double> lambda;  // default: half the window
    double tanh_scale = 1.0;
};

struct SequenceConfig {
    std::string matcher = "adaptive";  // adaptive | baseline
    std::vector<int> lengths{10, 20, 30};
    bool normalize = true;
    double epsilon = 1e-8;
};

struct PipelineConfig {
    InputConfig input;
    SynthPairConfig synth;
    BinningConfig binning;
    ReconConfig reconstruction;
    int descriptor_grid = 16;
    SequenceConfig sequence;
    double target_rate = 1.0;
    bool prefusion_zscore = false;
    double tolerance_m = 25.0;
    std::string group = "day-day";
    std::string output_dir = "evpr_out";
    bool write_pgm = true;
};

/// Parses INI text (sections [input], [synth], [binning], [reconstruction],
/// [descriptor], [sequence], [ensemble], [eval], [output]) and applies
/// `section.key=value` overrides. Unknown keys are rejected.
PipelineConfig parse_config(const std::string& ini_text, const std::vector<std::string>& overrides = {});
PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Sorted `section.key=value` lines of the effective configuration. Paths in
/// [output] are excluded so relocating outputs keeps the fingerprint.
std::string canonicalize(const PipelineConfig& cfg);

/// First 16 hex digits of SHA-256 over the canonical form.
std::string fingerprint(const PipelineConfig& cfg);

/// Worker count from EVPR_WORKERS (default 1).
int worker_count();

}  // namespace evpr
