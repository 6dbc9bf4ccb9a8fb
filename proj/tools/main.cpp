// evpr: event-camera place recognition pipeline and stage tools.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evpr/commands.hpp"
#include "evpr/error.hpp"
#include "evpr/pipeline.hpp"

namespace {

struct SliceFlags {
    std::string mode = "time";
    double dt = 1.0;
    std::size_t count = 5000;
    std::optional<double> t0;
    double hot_pixel = 0.0;
    std::uint16_t width = 0, height = 0;

    void add(CLI::App* app) {
        app->add_option("--mode", mode, "Binning mode")->check(CLI::IsMember({"time", "count"}))->capture_default_str();
        app->add_option("--dt", dt, "Window duration in seconds (time mode)")->capture_default_str();
        app->add_option("--count", count, "Events per bin (count mode)")->capture_default_str();
        app->add_option("--t0", t0, "Window origin in seconds (default: first event)");
        app->add_option("--hot-pixel", hot_pixel, "Hot-pixel rate multiple, 0 disables")->capture_default_str();
        app->add_option("--width", width, "Sensor width (CSV input; default inferred)");
        app->add_option("--height", height, "Sensor height (CSV input; default inferred)");
    }
    evpr::SliceOptions options() const { return {mode, dt, count, t0, hot_pixel}; }
    evpr::SensorSize sensor() const { return {width, height}; }
};

std::string fingerprint_of(const std::string& config, const std::vector<std::string>& sets) {
    if (config.empty() && sets.empty()) return "";
    return evpr::fingerprint(evpr::load_config(config, sets));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-camera visual place recognition: slicing, reconstruction, descriptors, sequence matching, "
                 "ensemble fusion and Recall@1 evaluation."};
    app.footer("Environment: EVPR_WORKERS sets the number of parallel ensemble members (default 1).\n"
               "Exit codes: 0 success, 2 config error, 3 data error, 4 internal invariant violation.");
    app.require_subcommand(1);

    // run ---------------------------------------------------------------
    std::string config_path, out_dir;
    std::vector<std::string> sets;
    auto* run = app.add_subcommand("run", "Run the full pipeline from a config file");
    run->add_option("--config,-c", config_path, "INI pipeline config")->check(CLI::ExistingFile);
    run->add_option("--set", sets, "Override a config value: section.key=value (repeatable)");
    run->add_option("--out-dir", out_dir, "Output directory (overrides output.dir)");

    // synth -------------------------------------------------------------
    std::string synth_format = "bin";
    auto* synth = app.add_subcommand("synth", "Generate a synthetic reference/query traverse pair");
    synth->add_option("--config,-c", config_path, "INI config; the [synth] section is used")->check(CLI::ExistingFile);
    synth->add_option("--set", sets, "Override a config value: section.key=value (repeatable)");
    synth->add_option("--out-dir", out_dir, "Directory for events and GPS files")->required();
    synth->add_option("--format", synth_format, "Event file format")->check(CLI::IsMember({"bin", "csv"}))->capture_default_str();

    // slice -------------------------------------------------------------
    std::string events_path, out_path;
    SliceFlags slice_flags;
    auto* slice = app.add_subcommand("slice", "Slice an event file into bins and write a bin manifest");
    slice->add_option("--events", events_path, "Event file (CSV or EVPR binary)")->required()->check(CLI::ExistingFile);
    slice->add_option("--out", out_path, "Bin manifest CSV (default: stdout)");
    slice_flags.add(slice);

    // reconstruct -------------------------------------------------------
    std::string method = "count_polarity";
    double lambda = 0.0, tanh_scale = 1.0;
    auto* recon = app.add_subcommand("reconstruct", "Slice and reconstruct events into an EVPF frame file");
    recon->add_option("--events", events_path, "Event file (CSV or EVPR binary)")->required()->check(CLI::ExistingFile);
    recon->add_option("--out", out_path, "EVPF output")->required();
    recon->add_option("--method", method, "count_polarity | count_no_polarity | time_surface")->capture_default_str();
    recon->add_option("--lambda", lambda, "Time-surface decay in seconds (0: half the bin duration)")->capture_default_str();
    recon->add_option("--tanh-scale", tanh_scale, "Divisor applied before tanh")->capture_default_str();
    slice_flags.add(recon);

    // describe ----------------------------------------------------------
    std::string frames_path, tag = "external/builtin/external";
    int grid = 16;
    auto* describe = app.add_subcommand("describe", "Compute built-in grid descriptors for an EVPF frame file");
    describe->add_option("--frames", frames_path, "EVPF input")->required()->check(CLI::ExistingFile);
    describe->add_option("--out", out_path, "EVPD output")->required();
    describe->add_option("--grid", grid, "Pooling grid cells per side")->capture_default_str();
    describe->add_option("--tag", tag, "Provenance tag reconstruction/extractor/resolution")->capture_default_str();
    describe->add_option("--config,-c", config_path, "Config whose fingerprint is embedded")->check(CLI::ExistingFile);
    describe->add_option("--set", sets, "Config overrides for the fingerprint");

    // similarity --------------------------------------------------------
    std::string query_path, reference_path;
    bool no_pgm = false;
    auto* similarity = app.add_subcommand("similarity", "Negative-L2 similarity matrix between two EVPD files");
    similarity->add_option("--query", query_path, "Query EVPD")->required()->check(CLI::ExistingFile);
    similarity->add_option("--reference", reference_path, "Reference EVPD")->required()->check(CLI::ExistingFile);
    similarity->add_option("--out", out_path, "Output stem (writes .csv and .pgm)")->required();
    similarity->add_flag("--no-pgm", no_pgm, "Skip the PGM rendering");

    // seqmatch ----------------------------------------------------------
    std::string matcher = "adaptive", in_path;
    evpr::SeqConfig seq;
    std::optional<bool> normalize;
    auto* seqmatch = app.add_subcommand("seqmatch", "Sequence-match a similarity dump");
    seqmatch->add_option("--in", in_path, "Similarity dump CSV")->required()->check(CLI::ExistingFile);
    seqmatch->add_option("--out", out_path, "Output stem")->required();
    seqmatch->add_option("--matcher", matcher, "adaptive | baseline")->check(CLI::IsMember({"adaptive", "baseline"}))->capture_default_str();
    seqmatch->add_option("--len", seq.length, "Sequence length in frames")->capture_default_str();
    seqmatch->add_option("--normalize", normalize, "Dual z-score normalisation (adaptive; default true)");
    seqmatch->add_option("--epsilon", seq.epsilon, "Standard-deviation floor")->capture_default_str();
    seqmatch->add_flag("--no-pgm", no_pgm, "Skip the PGM rendering");

    // ensemble ----------------------------------------------------------
    std::string manifest_path;
    double rate = 1.0;
    bool align = false, prefusion = false;
    auto* ensemble = app.add_subcommand("ensemble", "Fuse similarity dumps, or align descriptor files (--align)");
    ensemble->add_option("--manifest", manifest_path, "Manifest of 'tag = path' lines")->required()->check(CLI::ExistingFile);
    ensemble->add_option("--rate", rate, "Alignment rate in Hz")->capture_default_str();
    ensemble->add_flag("--align", align, "Align EVPD files instead of fusing dumps");
    ensemble->add_option("--out-dir", out_dir, "Output directory for --align");
    ensemble->add_option("--out", out_path, "Output stem for fusion");
    ensemble->add_flag("--prefusion-zscore", prefusion, "z-score each member before summation (ablation)");
    ensemble->add_flag("--no-pgm", no_pgm, "Skip the PGM rendering");

    // eval --------------------------------------------------------------
    std::string dump_path, query_gps, reference_gps, group = "day-day", members_path, name_a = "a", name_b = "b";
    double tolerance = 25.0;
    std::vector<std::string> compare_a, compare_b;
    auto* eval = app.add_subcommand("eval", "Recall@1 of a similarity dump, or paired t-test of summaries");
    eval->add_option("--similarity", dump_path, "Similarity dump CSV")->check(CLI::ExistingFile);
    eval->add_option("--query-gps", query_gps, "Query GPS CSV")->check(CLI::ExistingFile);
    eval->add_option("--reference-gps", reference_gps, "Reference GPS CSV")->check(CLI::ExistingFile);
    eval->add_option("--tolerance", tolerance, "Correct-match tolerance in metres")->capture_default_str();
    eval->add_option("--group", group, "Grouping label, e.g. day-day or day-night")->capture_default_str();
    eval->add_option("--members", members_path, "Manifest of member dumps for per-member recall")->check(CLI::ExistingFile);
    eval->add_option("--out", out_path, "Output stem (.csv and .json), or JSON path for --compare-*");
    eval->add_option("--compare-a", compare_a, "Summary JSONs of method A (paired by position)");
    eval->add_option("--compare-b", compare_b, "Summary JSONs of method B");
    eval->add_option("--name-a", name_a, "Name of method A")->capture_default_str();
    eval->add_option("--name-b", name_b, "Name of method B")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            if (!out_dir.empty()) sets.push_back("output.dir=" + out_dir);
            const auto cfg = evpr::load_config(config_path, sets);
            const auto result = evpr::run_pipeline(cfg);
            std::cout << "fingerprint " << result.fingerprint << "\n";
            for (const auto& [len, report] : result.reports) {
                std::cout << "L=" << len << " recall@1 " << evpr::format_double(report.recall) << " (" << report.n_correct
                          << "/" << report.n_queries << ")\n";
            }
        } else if (synth->parsed()) {
            const auto cfg = evpr::load_config(config_path, sets);
            evpr::cmd_synth(cfg.synth, out_dir, synth_format == "csv" ? evpr::EventFormat::Csv : evpr::EventFormat::Binary);
        } else if (slice->parsed()) {
            const auto bins = evpr::cmd_slice(events_path, slice_flags.sensor(), slice_flags.options(), out_path);
            if (out_path.empty()) {
                std::cout << "index,t_start_us,t_end_us,count,partial\n";
                for (const auto& b : bins) {
                    std::cout << b.index << "," << evpr::to_microseconds(b.t_start) << "," << evpr::to_microseconds(b.t_end)
                              << "," << b.events.size() << "," << (b.partial ? 1 : 0) << "\n";
                }
            }
        } else if (recon->parsed()) {
            const evpr::ReconParams params{evpr::parse_recon_method(method), lambda, tanh_scale};
            const auto n = evpr::cmd_reconstruct(events_path, slice_flags.sensor(), slice_flags.options(), params, out_path);
            std::cout << n << " frames\n";
        } else if (describe->parsed()) {
            const auto n = evpr::cmd_describe(frames_path, grid, evpr::make_label(tag, fingerprint_of(config_path, sets)), out_path);
            std::cout << n << " descriptors\n";
        } else if (similarity->parsed()) {
            evpr::cmd_similarity(query_path, reference_path, out_path, !no_pgm);
        } else if (seqmatch->parsed()) {
            seq.normalize = normalize.value_or(matcher == "adaptive");
            evpr::cmd_seqmatch(in_path, matcher, seq, out_path, !no_pgm);
        } else if (ensemble->parsed()) {
            const auto entries = evpr::load_manifest(manifest_path);
            if (align) {
                if (out_dir.empty()) throw evpr::ConfigError("--align requires --out-dir");
                const auto written = evpr::cmd_align(entries, rate, out_dir);
                std::cout << evpr::format_manifest(written);
            } else {
                if (out_path.empty()) throw evpr::ConfigError("fusion requires --out");
                evpr::cmd_fuse(entries, rate, prefusion, out_path, !no_pgm);
            }
        } else if (eval->parsed()) {
            if (!compare_a.empty() || !compare_b.empty()) {
                const auto c = evpr::cmd_compare(compare_a, compare_b, name_a, name_b, out_path);
                std::cout << c.a << " mean " << c.mean_a << " vs " << c.b << " mean " << c.mean_b << ": t = " << c.t
                          << ", p = " << c.p << " (n = " << c.n << ")\n";
            } else {
                if (dump_path.empty() || query_gps.empty() || reference_gps.empty() || out_path.empty()) {
                    throw evpr::ConfigError("eval requires --similarity, --query-gps, --reference-gps and --out");
                }
                const auto members = members_path.empty() ? std::vector<evpr::ManifestEntry>{} : evpr::load_manifest(members_path);
                const auto r = evpr::cmd_eval(dump_path, query_gps, reference_gps, tolerance, group, out_path, members);
                std::cout << "recall@1 " << evpr::format_double(r.recall) << " (" << r.n_correct << "/" << r.n_queries << ")\n";
            }
        }
    } catch (const evpr::Error& e) {
        std::cerr << "evpr: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "evpr: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "evpr: internal error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
