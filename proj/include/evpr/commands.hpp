#pragma once

// File-to-file pipeline stages. Each CLI subcommand is a thin wrapper over one
// of these, and run_pipeline chains the same functions, so staged and
// whole-pipeline runs produce identical bytes.

#include <optional>
#include <string>
#include <vector>

#include "evpr/config.hpp"
#include "evpr/ensemble.hpp"
#include "evpr/eval.hpp"

namespace evpr {

struct SliceOptions {
    std::string mode = "time";  // time | count
    double dt = 1.0;
    std::size_t count = 5000;
    std::optional<double> t0;
    double hot_pixel_multiple = 0.0;  // 0 disables suppression
};

/// Hot-pixel suppression (if enabled) then binning. t0 defaults to the first event.
std::vector<EventBin> slice_events(const EventStream& stream, const SliceOptions& opt);

/// Text name of a binning resolution: "0.25" for time windows, "n5000" for counts.
std::string resolution_name(const SliceOptions& opt);

/// Filesystem-safe form of a provenance tag.
std::string tag_filename(const std::string& tag);

/// Descriptor labels carry `tag#fingerprint`.
std::string make_label(const std::string& tag, const std::string& fingerprint);
Provenance provenance_from_label(const std::string& label);

struct SynthPaths {
    std::string query_events, query_gps, reference_events, reference_gps;
};
SynthPaths cmd_synth(const SynthPairConfig& cfg, const std::string& out_dir, EventFormat format = EventFormat::Binary);

/// Writes a bin manifest CSV: index,t_start_us,t_end_us,count,partial.
std::vector<EventBin> cmd_slice(const std::string& events_path, SensorSize sensor, const SliceOptions& opt,
                                const std::string& manifest_out);

/// Slices and reconstructs into an EVPF file. When params.lambda is 0 each bin
/// uses half its own duration.
std::size_t cmd_reconstruct(const std::string& events_path, SensorSize sensor, const SliceOptions& opt,
                            const ReconParams& params, const std::string& frames_out);

std::size_t cmd_describe(const std::string& frames_path, int grid, const std::string& label, const std::string& out);

/// Aligns descriptor files to a common rate; writes `<out_dir>/<tag>.evpd` per
/// entry and returns the written entries.
std::vector<ManifestEntry> cmd_align(const std::vector<ManifestEntry>& descriptor_files, double rate,
                                     const std::string& out_dir);

void cmd_similarity(const std::string& query_path, const std::string& reference_path, const std::string& out_stem,
                    bool pgm);

void cmd_seqmatch(const std::string& dump_path, const std::string& matcher, const SeqConfig& cfg,
                  const std::string& out_stem, bool pgm);

void cmd_fuse(const std::vector<ManifestEntry>& dumps, double rate, bool prefusion_zscore, const std::string& out_stem,
              bool pgm);

/// Evaluates a similarity dump against GPS tracks; `members` (optional) adds
/// per-member recalls to the summary. Writes `<out_stem>.csv/.json`.
EvalReport cmd_eval(const std::string& dump_path, const std::string& query_gps, const std::string& reference_gps,
                    double tolerance_m, const std::string& group, const std::string& out_stem,
                    const std::vector<ManifestEntry>& members = {});

/// Paired t-test of summary recalls, pairing `a[i]` with `b[i]`; writes a JSON
/// summary of the comparison when `out_json` is non-empty.
Comparison cmd_compare(const std::vector<std::string>& a, const std::vector<std::string>& b, const std::string& name_a,
                       const std::string& name_b, const std::string& out_json);

}  // namespace evpr
