#include "evpr/pipeline.hpp"

#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <thread>

#include "evpr/binio.hpp"
#include "evpr/commands.hpp"
#include "evpr/error.hpp"

namespace evpr {

namespace fs = std::filesystem;

namespace {

// Runs fn(0..n-1) on up to `workers` threads; rethrows the first failure.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min<int>(workers, static_cast<int>(n)); ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard lock(mu);
                    if (failure || next >= n) return;
                    i = next++;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct Member {
    std::string tag;
    ReconParams recon;
    SliceOptions slice;
};

std::string member_tag(std::string reconstruction, std::string resolution) {
    Provenance p;
    p.reconstruction = std::move(reconstruction);
    p.extractor = "builtin";
    p.resolution = std::move(resolution);
    return p.tag();
}

template <typename F>
auto stage(const char* name, const std::string& fp, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        rethrow_with_context(e, std::string("stage '") + name + "' [config " + fp + "]");
    } catch (const std::filesystem::filesystem_error& e) {
        throw DataError(std::string("stage '") + name + "' [config " + fp + "]: " + e.what());
    }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    PipelineResult result;
    const std::string fp = fingerprint(cfg);
    result.fingerprint = fp;
    result.output_dir = cfg.output_dir;
    const fs::path out(cfg.output_dir);
    const int workers = worker_count();

    stage("setup", fp, [&] {
        fs::create_directories(out);
        binio::write_text((out / "config.canonical.txt").string(), "# fingerprint=" + fp + "\n" + canonicalize(cfg));
        return 0;
    });

    InputConfig input = cfg.input;
    if (input.mode == "synth") {
        const auto paths = stage("synth", fp, [&] { return cmd_synth(cfg.synth, (out / "input").string()); });
        input.query_events = paths.query_events;
        input.query_gps = paths.query_gps;
        input.reference_events = paths.reference_events;
        input.reference_gps = paths.reference_gps;
    }

    std::vector<Member> members;
    for (const auto method : cfg.reconstruction.methods) {
        ReconParams recon{method, cfg.reconstruction.lambda.value_or(0.0), cfg.reconstruction.tanh_scale};
        if (method == ReconMethod::External) {
            members.push_back({member_tag("external", "external"), recon, {}});
            continue;
        }
        std::vector<SliceOptions> slices;
        if (cfg.binning.mode == "time") {
            for (double dt : cfg.binning.resolutions) slices.push_back({"time", dt, 0, cfg.binning.t0, cfg.binning.hot_pixel_multiple});
        } else {
            for (auto n : cfg.binning.counts) slices.push_back({"count", 0.0, n, std::nullopt, cfg.binning.hot_pixel_multiple});
        }
        for (const auto& s : slices) {
            members.push_back({member_tag(std::string(to_string(method)), resolution_name(s)), recon, s});
        }
    }
    for (const auto& m : members) result.member_tags.push_back(m.tag);

    // per member and traverse: frames -> descriptors
    const char* traverses[] = {"query", "reference"};
    std::vector<ManifestEntry> query_desc(members.size()), ref_desc(members.size());
    parallel_for(members.size(), workers, [&](std::size_t i) {
        const Member& m = members[i];
        for (int t = 0; t < 2; ++t) {
            const std::string name = std::string(traverses[t]) + "__" + tag_filename(m.tag);
            std::string frames = (out / "frames" / (name + ".evpf")).string();
            if (m.recon.method == ReconMethod::External) {
                frames = t == 0 ? input.query_frames : input.reference_frames;
            } else {
                stage("reconstruct", fp, [&] {
                    return cmd_reconstruct(t == 0 ? input.query_events : input.reference_events, input.sensor, m.slice,
                                           m.recon, frames);
                });
            }
            const std::string desc = (out / "descriptors" / (name + ".evpd")).string();
            stage("describe", fp, [&] { return cmd_describe(frames, cfg.descriptor_grid, make_label(m.tag, fp), desc); });
            (t == 0 ? query_desc : ref_desc)[i] = {m.tag, desc};
        }
    });

    const auto aligned_q = stage("align", fp, [&] { return cmd_align(query_desc, cfg.target_rate, (out / "aligned" / "query").string()); });
    const auto aligned_r = stage("align", fp, [&] { return cmd_align(ref_desc, cfg.target_rate, (out / "aligned" / "reference").string()); });

    std::vector<std::string> sim_dumps(members.size());
    parallel_for(members.size(), workers, [&](std::size_t i) {
        const std::string stem = (out / "similarity" / tag_filename(members[i].tag)).string();
        stage("similarity", fp, [&] {
            cmd_similarity(aligned_q[i].path, aligned_r[i].path, stem, cfg.write_pgm);
            return 0;
        });
        sim_dumps[i] = stem + ".csv";
    });

    for (int len : cfg.sequence.lengths) {
        const fs::path dir = out / ("L" + std::to_string(len));
        // a one-row history block z-scores to zero, so L = 1 runs as plain single-frame matching
        const SeqConfig seq{len, cfg.sequence.normalize && len > 1, cfg.sequence.epsilon};
        std::vector<ManifestEntry> seq_dumps(members.size());
        parallel_for(members.size(), workers, [&](std::size_t i) {
            const std::string stem = (dir / "members" / tag_filename(members[i].tag)).string();
            stage("seqmatch", fp, [&] {
                cmd_seqmatch(sim_dumps[i], cfg.sequence.matcher, seq, stem, cfg.write_pgm);
                return 0;
            });
            seq_dumps[i] = {members[i].tag, stem + ".csv"};
        });
        stage("ensemble", fp, [&] {
            // manifest paths are relative to the manifest's own directory
            std::vector<ManifestEntry> listed;
            for (const auto& m : members) listed.push_back({m.tag, "members/" + tag_filename(m.tag) + ".csv"});
            binio::write_text((dir / "members.txt").string(), format_manifest(listed));
            cmd_fuse(seq_dumps, cfg.target_rate, cfg.prefusion_zscore, (dir / "fused").string(), cfg.write_pgm);
            return 0;
        });
        result.reports[len] = stage("eval", fp, [&] {
            return cmd_eval((dir / "fused.csv").string(), input.query_gps, input.reference_gps, cfg.tolerance_m, cfg.group,
                            (dir / "report").string(), seq_dumps);
        });
    }
    return result;
}

}  // namespace evpr
