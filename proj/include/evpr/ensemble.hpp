#pragma once

#include <string>
#include <utility>
#include <vector>

#include "evpr/similarity.hpp"

namespace evpr {

struct Alignment {
    std::vector<double> ticks;                        // seconds
    std::vector<std::vector<std::size_t>> selection;  // per member, one frame index per tick
};

/// Samples every member on a common grid t_k = t_origin + k / rate, where
/// t_origin is the latest first timestamp. Each member contributes its latest
/// frame at or before the tick; a tick is dropped when some member's latest
/// frame is half a period old or more.
Alignment align_members(const std::vector<std::vector<double>>& timestamps, double target_rate);

struct EnsembleSet {
    std::vector<SimilarityMatrix> members;
    double alignment_rate = 1.0;
    bool prefusion_zscore = false;  // ablation only
};

/// Element-wise sum of all members, accumulated in sorted provenance-tag order.
SimilarityMatrix fuse(const EnsembleSet& set);

std::vector<Match> predict(const SimilarityMatrix& fused);

struct ManifestEntry {
    std::string tag;
    std::string path;
};

/// `tag = path` per line; `#` comments. Relative paths resolve against the
/// manifest's directory.
std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::string& base_dir);
std::vector<ManifestEntry> load_manifest(const std::string& path);
std::string format_manifest(const std::vector<ManifestEntry>& entries);

}  // namespace evpr
