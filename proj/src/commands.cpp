#include "evpr/commands.hpp"

#include <filesystem>

#include <json.hpp>

#include "evpr/binio.hpp"
#include "evpr/error.hpp"

namespace evpr {

namespace fs = std::filesystem;

namespace {

void ensure_parent(const std::string& path) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

}  // namespace

std::vector<EventBin> slice_events(const EventStream& stream, const SliceOptions& opt) {
    const EventStream filtered = opt.hot_pixel_multiple > 0.0 ? filter_hot_pixels(stream, opt.hot_pixel_multiple) : stream;
    if (opt.mode == "count") return slice_by_count(filtered, opt.count);
    if (opt.mode != "time") throw ConfigError("binning mode must be 'time' or 'count'");
    if (filtered.events.empty()) return {};
    return slice_by_time(filtered, opt.dt, opt.t0.value_or(filtered.events.front().t));
}

std::string resolution_name(const SliceOptions& opt) {
    return opt.mode == "count" ? "n" + std::to_string(opt.count) : format_double(opt.dt);
}

std::string tag_filename(const std::string& tag) {
    std::string out = tag;
    for (char& c : out) {
        if (c == '/' || c == '\\' || c == ' ' || c == ':') c = '_';
    }
    return out;
}

std::string make_label(const std::string& tag, const std::string& fingerprint) {
    return fingerprint.empty() ? tag : tag + "#" + fingerprint;
}

Provenance provenance_from_label(const std::string& label) {
    Provenance p;
    const auto hash = label.find('#');
    const std::string tag = label.substr(0, hash);
    if (hash != std::string::npos) p.fingerprint = label.substr(hash + 1);
    const auto a = tag.find('/');
    const auto b = a == std::string::npos ? a : tag.find('/', a + 1);
    if (b == std::string::npos) {
        p.reconstruction = tag;
        p.extractor = "unknown";
        p.resolution = "unknown";
    } else {
        p.reconstruction = tag.substr(0, a);
        p.extractor = tag.substr(a + 1, b - a - 1);
        p.resolution = tag.substr(b + 1);
    }
    return p;
}

SynthPaths cmd_synth(const SynthPairConfig& cfg, const std::string& out_dir, EventFormat format) {
    fs::create_directories(out_dir);
    const std::string ext = format == EventFormat::Binary ? ".bin" : ".csv";
    SynthPaths paths{(fs::path(out_dir) / ("query_events" + ext)).string(), (fs::path(out_dir) / "query_gps.csv").string(),
                     (fs::path(out_dir) / ("reference_events" + ext)).string(),
                     (fs::path(out_dir) / "reference_gps.csv").string()};

    SynthParams ref = cfg.reference;
    ref.appearance_shift = 0.0;
    const Traverse reference = generate_traverse(ref);
    const Traverse query = perturb_traverse(ref, cfg.reference.appearance_shift, cfg.query_seed);

    save_events(reference.stream, paths.reference_events, format);
    binio::write_text(paths.reference_gps, format_gps_csv(reference.track));
    save_events(query.stream, paths.query_events, format);
    binio::write_text(paths.query_gps, format_gps_csv(query.track));
    return paths;
}

std::vector<EventBin> cmd_slice(const std::string& events_path, SensorSize sensor, const SliceOptions& opt,
                                const std::string& manifest_out) {
    const auto bins = slice_events(load_events(events_path, sensor), opt);
    std::string out = "index,t_start_us,t_end_us,count,partial\n";
    for (const auto& b : bins) {
        out += std::to_string(b.index) + "," + std::to_string(to_microseconds(b.t_start)) + "," +
               std::to_string(to_microseconds(b.t_end)) + "," + std::to_string(b.events.size()) + "," +
               (b.partial ? "1" : "0") + "\n";
    }
    if (!manifest_out.empty()) {
        ensure_parent(manifest_out);
        binio::write_text(manifest_out, out);
    }
    return bins;
}

std::size_t cmd_reconstruct(const std::string& events_path, SensorSize sensor, const SliceOptions& opt,
                            const ReconParams& params, const std::string& frames_out) {
    const EventStream stream = load_events(events_path, sensor);
    const auto bins = slice_events(stream, opt);
    std::vector<RenderedFrame> frames;
    frames.reserve(bins.size());
    std::int64_t last_us = -1;
    for (const auto& bin : bins) {
        ReconParams p = params;
        if (p.method == ReconMethod::TimeSurface && p.lambda <= 0.0) p.lambda = std::max((bin.t_end - bin.t_start) / 2.0, 1e-6);
        RenderedFrame f = reconstruct(bin, p, stream.sensor);
        // frames must carry strictly increasing microsecond timestamps
        const std::int64_t us = to_microseconds(f.t_end);
        if (us <= last_us) continue;
        last_us = us;
        frames.push_back(std::move(f));
    }
    ensure_parent(frames_out);
    save_frames(frames, stream.sensor, frames_out);
    return frames.size();
}

std::size_t cmd_describe(const std::string& frames_path, int grid, const std::string& label, const std::string& out) {
    const auto frames = ingest_external_frames(frames_path);
    const DescriptorSet set = describe_frames(frames, grid, label);
    ensure_parent(out);
    save_descriptors(set, out);
    return static_cast<std::size_t>(set.count());
}

std::vector<ManifestEntry> cmd_align(const std::vector<ManifestEntry>& descriptor_files, double rate,
                                     const std::string& out_dir) {
    std::vector<DescriptorSet> sets;
    std::vector<std::vector<double>> stamps;
    for (const auto& e : descriptor_files) {
        sets.push_back(load_descriptors(e.path));
        stamps.push_back(sets.back().timestamps);
    }
    const Alignment a = align_members(stamps, rate);
    fs::create_directories(out_dir);
    std::vector<ManifestEntry> written;
    for (std::size_t m = 0; m < sets.size(); ++m) {
        const std::string path = (fs::path(out_dir) / (tag_filename(descriptor_files[m].tag) + ".evpd")).string();
        save_descriptors(select_rows(sets[m], a.selection[m]), path);
        written.push_back({descriptor_files[m].tag, path});
    }
    return written;
}

void cmd_similarity(const std::string& query_path, const std::string& reference_path, const std::string& out_stem,
                    bool pgm) {
    const DescriptorSet q = load_descriptors(query_path);
    const DescriptorSet r = load_descriptors(reference_path);
    SimilarityMatrix s = similarity_matrix(q, r);
    s.provenance = provenance_from_label(q.label);
    ensure_parent(out_stem);
    save_similarity_dump(s, out_stem, pgm);
}

void cmd_seqmatch(const std::string& dump_path, const std::string& matcher, const SeqConfig& cfg,
                  const std::string& out_stem, bool pgm) {
    const SimilarityMatrix s = load_similarity_dump(dump_path);
    SimilarityMatrix out;
    if (matcher == "adaptive") out = seq_match_adaptive(s, cfg);
    else if (matcher == "baseline") out = seq_match_baseline(s, cfg.length);
    else throw ConfigError("unknown matcher '" + matcher + "'");
    ensure_parent(out_stem);
    save_similarity_dump(out, out_stem, pgm);
}

void cmd_fuse(const std::vector<ManifestEntry>& dumps, double rate, bool prefusion_zscore, const std::string& out_stem,
              bool pgm) {
    EnsembleSet set;
    set.alignment_rate = rate;
    set.prefusion_zscore = prefusion_zscore;
    for (const auto& e : dumps) set.members.push_back(load_similarity_dump(e.path));
    const SimilarityMatrix fused = fuse(set);
    ensure_parent(out_stem);
    save_similarity_dump(fused, out_stem, pgm);
}

EvalReport cmd_eval(const std::string& dump_path, const std::string& query_gps, const std::string& reference_gps,
                    double tolerance_m, const std::string& group, const std::string& out_stem,
                    const std::vector<ManifestEntry>& members) {
    const GeoTrack qt = load_gps(query_gps);
    const GeoTrack rt = load_gps(reference_gps);
    const auto evaluate = [&](const SimilarityMatrix& s) {
        return recall_at_1(argmax_matches(s), interpolate_positions(qt, s.query_timestamps),
                           interpolate_positions(rt, s.ref_timestamps), tolerance_m);
    };
    const SimilarityMatrix s = load_similarity_dump(dump_path);
    EvalReport report = make_report(s, evaluate(s), tolerance_m, group);
    for (const auto& m : members) report.members.push_back({m.tag, evaluate(load_similarity_dump(m.path)).recall});
    ensure_parent(out_stem);
    emit_report(report, out_stem);
    return report;
}

Comparison cmd_compare(const std::vector<std::string>& a, const std::vector<std::string>& b, const std::string& name_a,
                       const std::string& name_b, const std::string& out_json) {
    if (a.size() != b.size()) throw ConfigError("compare: both sides need the same number of summaries");
    std::vector<double> ra, rb;
    for (const auto& p : a) ra.push_back(load_summary(p).recall);
    for (const auto& p : b) rb.push_back(load_summary(p).recall);
    const Comparison c = compare(name_a, ra, name_b, rb);
    if (!out_json.empty()) {
        nlohmann::json j;
        j["comparisons"] = nlohmann::json::array(
            {{{"a", c.a}, {"b", c.b}, {"n", c.n}, {"mean_a", c.mean_a}, {"mean_b", c.mean_b}, {"t", c.t}, {"p", c.p}}});
        ensure_parent(out_json);
        binio::write_text(out_json, j.dump(2) + "\n");
    }
    return c;
}

}  // namespace evpr
