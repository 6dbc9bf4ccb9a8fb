#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "evpr/binio.hpp"
#include "evpr/commands.hpp"
#include "evpr/config.hpp"
#include "evpr/error.hpp"
#include "evpr/pipeline.hpp"

using namespace evpr;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"(
[synth]
route_length = 250
noise_rate = 0.2
appearance_shift = 0.2
event_rate_per_meter = 200

[binning]
resolutions = 0.5, 1.0

[reconstruction]
methods = count_polarity, time_surface

[descriptor]
grid = 4

[sequence]
lengths = 1, 5
)";

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("evpr_test_pipeline_" + name);
    fs::remove_all(dir);
    return dir;
}

std::map<std::string, std::vector<std::uint8_t>> tree(const fs::path& root) {
    std::map<std::string, std::vector<std::uint8_t>> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = binio::read_file(e.path().string());
    }
    return out;
}

}  // namespace

TEST_CASE("config parsing, overrides and fingerprint") {
    const auto def = parse_config("");
    CHECK(def.sequence.lengths == std::vector<int>{10, 20, 30});
    CHECK(def.target_rate == 1.0);
    CHECK(def.tolerance_m == 25.0);
    CHECK(def.descriptor_grid == 16);

    const auto c = parse_config(kSmallConfig, {"sequence.lengths=3", "eval.group=day-night"});
    CHECK(c.synth.reference.route_length == 250.0);
    CHECK(c.binning.resolutions == std::vector<double>{0.5, 1.0});
    CHECK(c.reconstruction.methods == std::vector<ReconMethod>{ReconMethod::CountPolarity, ReconMethod::TimeSurface});
    CHECK(c.sequence.lengths == std::vector<int>{3});
    CHECK(c.group == "day-night");

    CHECK_THROWS_AS(parse_config("[synth]\nroute_lenght = 5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("", {"nosection=1"}), ConfigError);
    CHECK_THROWS_AS(parse_config("[descriptor]\ngrid = many\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[reconstruction]\nmethods = e2vid_magic\n"), ConfigError);

    const auto fp = fingerprint(c);
    CHECK(fp.size() == 16);
    CHECK(fingerprint(parse_config(kSmallConfig, {"sequence.lengths=3", "eval.group=day-night"})) == fp);
    CHECK(fingerprint(parse_config(kSmallConfig, {"sequence.lengths=3", "eval.group=day-night", "output.dir=/x"})) == fp);
    CHECK(fingerprint(parse_config(kSmallConfig, {"sequence.lengths=4", "eval.group=day-night"})) != fp);
}

TEST_CASE("pipeline grid run: members, fused reports and determinism") {
    const auto a = scratch("a"), b = scratch("b");
    auto cfg = parse_config(kSmallConfig);
    cfg.output_dir = a.string();
    const auto ra = run_pipeline(cfg);
    cfg.output_dir = b.string();
    const auto rb = run_pipeline(cfg);

    CHECK(ra.member_tags.size() == 4);
    CHECK(ra.fingerprint == rb.fingerprint);
    for (int len : {1, 5}) {
        const auto dir = a / ("L" + std::to_string(len));
        std::size_t dumps = 0;
        for (const auto& e : fs::directory_iterator(dir / "members")) dumps += e.path().extension() == ".csv" ? 1 : 0;
        CHECK(dumps == 4);
        CHECK(fs::exists(dir / "fused.csv"));
        CHECK(fs::exists(dir / "report.json"));
        CHECK(fs::exists(dir / "report.csv"));
        const auto& rep = ra.reports.at(len);
        CHECK(rep.members.size() == 4);
        CHECK(rep.provenance.members.size() == 4);
        CHECK(rep.provenance.fingerprint == ra.fingerprint);
        CHECK(rep.provenance.seq_len == len);
        CHECK((rep.recall >= 0.0 && rep.recall <= 1.0));
    }

    const auto ta = tree(a), tb = tree(b);
    REQUIRE(ta.size() == tb.size());
    for (const auto& [name, bytes] : ta) {
        INFO(name);
        REQUIRE(tb.count(name) == 1);
        CHECK(tb.at(name) == bytes);
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("single member at L = 1 equals single-frame matching") {
    const auto dir = scratch("single");
    auto cfg = parse_config(kSmallConfig, {"binning.resolutions=1.0", "reconstruction.methods=count_polarity",
                                           "sequence.lengths=1", "output.pgm=false"});
    cfg.output_dir = dir.string();
    const auto r = run_pipeline(cfg);
    REQUIRE(r.member_tags.size() == 1);

    const auto sim = load_similarity_dump((dir / "similarity" / (tag_filename(r.member_tags[0]) + ".csv")).string());
    const auto fused = load_similarity_dump((dir / "L1" / "fused.csv").string());
    CHECK(fused.scores == sim.scores);
    const auto single = cmd_eval((dir / "similarity" / (tag_filename(r.member_tags[0]) + ".csv")).string(),
                                 (dir / "input" / "query_gps.csv").string(), (dir / "input" / "reference_gps.csv").string(),
                                 cfg.tolerance_m, cfg.group, (dir / "single").string());
    CHECK(single.recall == r.reports.at(1).recall);
    CHECK(single.n_correct == r.reports.at(1).n_correct);
    fs::remove_all(dir);
}

TEST_CASE("staged stage functions reproduce run_pipeline byte-exactly") {
    const auto whole = scratch("whole"), staged = scratch("staged");
    auto cfg = parse_config(kSmallConfig, {"sequence.lengths=5"});
    cfg.output_dir = whole.string();
    const auto r = run_pipeline(cfg);
    const auto fp = r.fingerprint;

    const auto paths = cmd_synth(cfg.synth, (staged / "input").string());
    std::vector<ManifestEntry> qd, rd;
    for (const auto method : cfg.reconstruction.methods) {
        for (double dt : cfg.binning.resolutions) {
            const SliceOptions opt{"time", dt, 0, std::nullopt, cfg.binning.hot_pixel_multiple};
            const std::string tag = Provenance{std::string(to_string(method)), "builtin", resolution_name(opt)}.tag();
            const ReconParams rp{method, 0.0, 1.0};
            for (int t = 0; t < 2; ++t) {
                const std::string base = (staged / (std::to_string(t) + tag_filename(tag))).string();
                cmd_reconstruct(t == 0 ? paths.query_events : paths.reference_events, {}, opt, rp, base + ".evpf");
                cmd_describe(base + ".evpf", cfg.descriptor_grid, make_label(tag, fp), base + ".evpd");
                (t == 0 ? qd : rd).push_back({tag, base + ".evpd"});
            }
        }
    }
    const auto aq = cmd_align(qd, 1.0, (staged / "aq").string());
    const auto ar = cmd_align(rd, 1.0, (staged / "ar").string());
    std::vector<ManifestEntry> seq;
    for (std::size_t i = 0; i < aq.size(); ++i) {
        const std::string stem = (staged / ("sim_" + tag_filename(aq[i].tag))).string();
        cmd_similarity(aq[i].path, ar[i].path, stem, false);
        CHECK(binio::read_file(stem + ".csv") ==
              binio::read_file((whole / "similarity" / (tag_filename(aq[i].tag) + ".csv")).string()));
        cmd_seqmatch(stem + ".csv", "adaptive", {5, true, 1e-8}, stem + "_L5", false);
        seq.push_back({aq[i].tag, stem + "_L5.csv"});
    }
    cmd_fuse(seq, 1.0, false, (staged / "fused").string(), false);
    cmd_eval((staged / "fused.csv").string(), paths.query_gps, paths.reference_gps, 25.0, "day-day",
             (staged / "report").string(), seq);

    for (const char* f : {"fused.csv", "report.csv", "report.json"}) {
        INFO(f);
        CHECK(binio::read_file((staged / f).string()) == binio::read_file((whole / "L5" / f).string()));
    }
    fs::remove_all(whole);
    fs::remove_all(staged);
}

TEST_CASE("stage errors carry the stage name and fingerprint") {
    const auto dir = scratch("error");
    auto cfg = parse_config("[input]\nmode = files\nquery_events = /nonexistent/q.bin\nreference_events = /nonexistent/r.bin\n"
                            "query_gps = /nonexistent/q.csv\nreference_gps = /nonexistent/r.csv\n");
    cfg.output_dir = dir.string();
    try {
        run_pipeline(cfg);
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("stage 'reconstruct'") != std::string::npos);
        CHECK(msg.find(fingerprint(cfg)) != std::string::npos);
        CHECK(e.exit_code() == 3);
    }
    fs::remove_all(dir);
}

TEST_CASE("slice_events and naming helpers") {
    EventStream s;
    s.sensor = {4, 4};
    for (int i = 0; i < 10; ++i) s.events.push_back({1, 1, 2.0 + 0.1 * i, 1});
    const auto bins = slice_events(s, {"time", 0.5, 0, std::nullopt, 0.0});
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].t_start == 2.0);
    CHECK(resolution_name({"time", 0.25, 0, std::nullopt, 0.0}) == "0.25");
    CHECK(resolution_name({"count", 0.0, 5000, std::nullopt, 0.0}) == "n5000");
    const auto p = provenance_from_label(make_label("time_surface/builtin/0.5", "abcd"));
    CHECK(p.reconstruction == "time_surface");
    CHECK(p.resolution == "0.5");
    CHECK(p.fingerprint == "abcd");
    CHECK(tag_filename("a/b/0.5").find('/') == std::string::npos);
}
