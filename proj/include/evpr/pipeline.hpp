#pragma once

#include <map>
#include <string>
#include <vector>

#include "evpr/config.hpp"
#include "evpr/eval.hpp"

namespace evpr {

struct PipelineResult {
    std::string fingerprint;
    std::vector<std::string> member_tags;
    std::map<int, EvalReport> reports;  // fused report per sequence length
    std::string output_dir;
};

/// slice -> reconstruct -> describe -> align -> similarity -> seqmatch -> fuse
/// -> eval, persisting every intermediate under cfg.output_dir. Stage errors
/// are rethrown prefixed with the stage name and config fingerprint.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace evpr
