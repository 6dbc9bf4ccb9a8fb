#include "evpr/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include "evpr/binio.hpp"
#include "evpr/error.hpp"
#include "evpr/similarity.hpp"

namespace evpr {

namespace {

using Tree = boost::property_tree::ptree;

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "input.mode", "input.query_events", "input.reference_events", "input.query_gps", "input.reference_gps",
        "input.query_frames", "input.reference_frames", "input.width", "input.height",
        "synth.seed", "synth.query_seed", "synth.route_length", "synth.mean_speed", "synth.speed_variation",
        "synth.stop_count", "synth.stop_duration", "synth.event_rate_per_meter", "synth.scene_grid",
        "synth.view_length", "synth.noise_rate", "synth.appearance_shift", "synth.hot_pixels",
        "synth.hot_pixel_rate", "synth.width", "synth.height", "synth.gps_rate",
        "binning.mode", "binning.resolutions", "binning.counts", "binning.t0", "binning.hot_pixel_multiple",
        "reconstruction.methods", "reconstruction.lambda", "reconstruction.tanh_scale",
        "descriptor.grid",
        "sequence.matcher", "sequence.lengths", "sequence.normalize", "sequence.epsilon",
        "ensemble.target_rate", "ensemble.prefusion_zscore",
        "eval.tolerance", "eval.group",
        "output.dir", "output.pgm",
    };
    return keys;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

template <typename T>
T parse_scalar(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if constexpr (std::is_same_v<T, std::string>) {
        return v;
    } else if constexpr (std::is_same_v<T, bool>) {
        if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "off" || v == "no") return false;
        throw ConfigError(key + ": expected a boolean, got '" + v + "'");
    } else {
        T out{};
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
            throw ConfigError(key + ": cannot parse '" + v + "'");
        }
        return out;
    }
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
    std::vector<T> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!trim(item).empty()) out.push_back(parse_scalar<T>(key, item));
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

class Fields {
public:
    explicit Fields(const Tree& tree) {
        for (const auto& [section, body] : tree) {
            if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
            for (const auto& [key, value] : body) {
                const std::string full = section + "." + key;
                if (!known_keys().contains(full)) throw ConfigError("unknown config key '" + full + "'");
                values_[full] = value.data();
            }
        }
    }

    void set(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not section.key=value");
        const std::string key = trim(assignment.substr(0, eq));
        if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
        values_[key] = assignment.substr(eq + 1);
    }

    template <typename T>
    void get(const std::string& key, T& out) const {
        if (auto it = values_.find(key); it != values_.end()) out = parse_scalar<T>(key, it->second);
    }
    template <typename T>
    void get_list(const std::string& key, std::vector<T>& out) const {
        if (auto it = values_.find(key); it != values_.end()) out = parse_list<T>(key, it->second);
    }
    bool has(const std::string& key) const { return values_.contains(key); }

private:
    std::map<std::string, std::string> values_;
};

void check(const PipelineConfig& c) {
    if (c.input.mode != "synth" && c.input.mode != "files") throw ConfigError("input.mode must be 'synth' or 'files'");
    if (c.input.mode == "files") {
        for (const auto* p : {&c.input.query_events, &c.input.reference_events, &c.input.query_gps, &c.input.reference_gps}) {
            if (p->empty()) throw ConfigError("input.mode=files requires query/reference events and GPS paths");
        }
    }
    const bool external = std::find(c.reconstruction.methods.begin(), c.reconstruction.methods.end(), ReconMethod::External) !=
                          c.reconstruction.methods.end();
    if (external && (c.input.query_frames.empty() || c.input.reference_frames.empty())) {
        throw ConfigError("the external reconstruction requires input.query_frames and input.reference_frames");
    }
    if (c.binning.mode != "time" && c.binning.mode != "count") throw ConfigError("binning.mode must be 'time' or 'count'");
    for (double r : c.binning.resolutions) {
        if (!(r > 0.0)) throw ConfigError("binning.resolutions must be > 0");
    }
    for (auto n : c.binning.counts) {
        if (n == 0) throw ConfigError("binning.counts must be >= 1");
    }
    if (c.binning.hot_pixel_multiple < 0.0) throw ConfigError("binning.hot_pixel_multiple must be >= 0");
    if (c.reconstruction.lambda && !(*c.reconstruction.lambda > 0.0)) throw ConfigError("reconstruction.lambda must be > 0");
    if (!(c.reconstruction.tanh_scale > 0.0)) throw ConfigError("reconstruction.tanh_scale must be > 0");
    if (c.descriptor_grid < 1) throw ConfigError("descriptor.grid must be >= 1");
    if (c.sequence.matcher != "adaptive" && c.sequence.matcher != "baseline") throw ConfigError("sequence.matcher must be 'adaptive' or 'baseline'");
    for (int l : c.sequence.lengths) {
        if (l < 1) throw ConfigError("sequence.lengths must be >= 1");
    }
    if (!(c.sequence.epsilon > 0.0)) throw ConfigError("sequence.epsilon must be > 0");
    if (!(c.target_rate > 0.0)) throw ConfigError("ensemble.target_rate must be > 0");
    if (!(c.tolerance_m >= 0.0)) throw ConfigError("eval.tolerance must be >= 0");
    if (c.input.mode == "synth") validate(c.synth.reference);
}

template <typename T>
std::string list_text(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>) out += format_double(v[i]);
        else if constexpr (std::is_same_v<T, ReconMethod>) out += to_string(v[i]);
        else out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

PipelineConfig parse_config(const std::string& ini_text, const std::vector<std::string>& overrides) {
    Tree tree;
    try {
        std::istringstream in(ini_text);
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    Fields f(tree);
    for (const auto& o : overrides) f.set(o);

    PipelineConfig c;
    auto& in = c.input;
    f.get("input.mode", in.mode);
    f.get("input.query_events", in.query_events);
    f.get("input.reference_events", in.reference_events);
    f.get("input.query_gps", in.query_gps);
    f.get("input.reference_gps", in.reference_gps);
    f.get("input.query_frames", in.query_frames);
    f.get("input.reference_frames", in.reference_frames);
    f.get("input.width", in.sensor.width);
    f.get("input.height", in.sensor.height);

    auto& s = c.synth.reference;
    f.get("synth.seed", s.seed);
    f.get("synth.query_seed", c.synth.query_seed);
    f.get("synth.route_length", s.route_length);
    f.get("synth.mean_speed", s.mean_speed);
    f.get("synth.speed_variation", s.speed_variation);
    f.get("synth.stop_count", s.stop_count);
    f.get("synth.stop_duration", s.stop_duration);
    f.get("synth.event_rate_per_meter", s.event_rate_per_meter);
    f.get("synth.scene_grid", s.scene_grid);
    f.get("synth.view_length", s.view_length);
    f.get("synth.noise_rate", s.noise_rate);
    f.get("synth.appearance_shift", s.appearance_shift);
    f.get("synth.hot_pixels", s.hot_pixels);
    f.get("synth.hot_pixel_rate", s.hot_pixel_rate);
    f.get("synth.width", s.sensor.width);
    f.get("synth.height", s.sensor.height);
    f.get("synth.gps_rate", s.gps_rate);

    f.get("binning.mode", c.binning.mode);
    f.get_list("binning.resolutions", c.binning.resolutions);
    f.get_list("binning.counts", c.binning.counts);
    if (f.has("binning.t0")) {
        double t0 = 0.0;
        f.get("binning.t0", t0);
        c.binning.t0 = t0;
    }
    f.get("binning.hot_pixel_multiple", c.binning.hot_pixel_multiple);

    std::vector<std::string> methods;
    f.get_list("reconstruction.methods", methods);
    if (!methods.empty()) {
        c.reconstruction.methods.clear();
        for (const auto& m : methods) c.reconstruction.methods.push_back(parse_recon_method(m));
    }
    if (f.has("reconstruction.lambda")) {
        double l = 0.0;
        f.get("reconstruction.lambda", l);
        c.reconstruction.lambda = l;
    }
    f.get("reconstruction.tanh_scale", c.reconstruction.tanh_scale);
    f.get("descriptor.grid", c.descriptor_grid);

    f.get("sequence.matcher", c.sequence.matcher);
    f.get_list("sequence.lengths", c.sequence.lengths);
    f.get("sequence.normalize", c.sequence.normalize);
    f.get("sequence.epsilon", c.sequence.epsilon);

    f.get("ensemble.target_rate", c.target_rate);
    f.get("ensemble.prefusion_zscore", c.prefusion_zscore);
    f.get("eval.tolerance", c.tolerance_m);
    f.get("eval.group", c.group);
    f.get("output.dir", c.output_dir);
    f.get("output.pgm", c.write_pgm);

    check(c);
    return c;
}

PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::string text;
    if (!path.empty()) {
        std::vector<std::uint8_t> bytes;
        try {
            bytes = binio::read_file(path);
        } catch (const DataError& e) {
            throw ConfigError(e.what());
        }
        text.assign(bytes.begin(), bytes.end());
    }
    return parse_config(text, overrides);
}

std::string canonicalize(const PipelineConfig& c) {
    std::map<std::string, std::string> kv;
    const auto num = [](double v) { return format_double(v); };
    kv["input.mode"] = c.input.mode;
    kv["input.width"] = std::to_string(c.input.sensor.width);
    kv["input.height"] = std::to_string(c.input.sensor.height);
    if (c.input.mode == "files") {
        kv["input.query_events"] = c.input.query_events;
        kv["input.reference_events"] = c.input.reference_events;
        kv["input.query_gps"] = c.input.query_gps;
        kv["input.reference_gps"] = c.input.reference_gps;
    } else {
        const auto& s = c.synth.reference;
        kv["synth.seed"] = std::to_string(s.seed);
        kv["synth.query_seed"] = std::to_string(c.synth.query_seed);
        kv["synth.route_length"] = num(s.route_length);
        kv["synth.mean_speed"] = num(s.mean_speed);
        kv["synth.speed_variation"] = num(s.speed_variation);
        kv["synth.stop_count"] = std::to_string(s.stop_count);
        kv["synth.stop_duration"] = num(s.stop_duration);
        kv["synth.event_rate_per_meter"] = num(s.event_rate_per_meter);
        kv["synth.scene_grid"] = std::to_string(s.scene_grid);
        kv["synth.view_length"] = num(s.view_length);
        kv["synth.noise_rate"] = num(s.noise_rate);
        kv["synth.appearance_shift"] = num(s.appearance_shift);
        kv["synth.hot_pixels"] = std::to_string(s.hot_pixels);
        kv["synth.hot_pixel_rate"] = num(s.hot_pixel_rate);
        kv["synth.width"] = std::to_string(s.sensor.width);
        kv["synth.height"] = std::to_string(s.sensor.height);
        kv["synth.gps_rate"] = num(s.gps_rate);
    }
    if (!c.input.query_frames.empty()) {
        kv["input.query_frames"] = c.input.query_frames;
        kv["input.reference_frames"] = c.input.reference_frames;
    }
    kv["binning.mode"] = c.binning.mode;
    if (c.binning.mode == "time") kv["binning.resolutions"] = list_text(c.binning.resolutions);
    else kv["binning.counts"] = list_text(c.binning.counts);
    kv["binning.t0"] = c.binning.t0 ? num(*c.binning.t0) : "auto";
    kv["binning.hot_pixel_multiple"] = num(c.binning.hot_pixel_multiple);
    kv["reconstruction.methods"] = list_text(c.reconstruction.methods);
    kv["reconstruction.lambda"] = c.reconstruction.lambda ? num(*c.reconstruction.lambda) : "auto";
    kv["reconstruction.tanh_scale"] = num(c.reconstruction.tanh_scale);
    kv["descriptor.grid"] = std::to_string(c.descriptor_grid);
    kv["sequence.matcher"] = c.sequence.matcher;
    kv["sequence.lengths"] = list_text(c.sequence.lengths);
    kv["sequence.normalize"] = c.sequence.normalize ? "true" : "false";
    kv["sequence.epsilon"] = num(c.sequence.epsilon);
    kv["ensemble.target_rate"] = num(c.target_rate);
    kv["ensemble.prefusion_zscore"] = c.prefusion_zscore ? "true" : "false";
    kv["eval.tolerance"] = num(c.tolerance_m);
    kv["eval.group"] = c.group;

    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::string fingerprint(const PipelineConfig& cfg) {
    const std::string text = canonicalize(cfg);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw InvariantError("fingerprint: SHA-256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    for (unsigned int i = 0; i < 8; ++i) {
        hex += kHex[digest[i] >> 4];
        hex += kHex[digest[i] & 0xf];
    }
    return hex;
}

int worker_count() {
    if (const char* env = std::getenv("EVPR_WORKERS")) {
        int n = 0;
        const std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec == std::errc() && ptr == s.data() + s.size() && n >= 1) return n;
        throw ConfigError("EVPR_WORKERS must be a positive integer");
    }
    return 1;
}

}  // namespace evpr
