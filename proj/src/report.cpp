#include <cmath>
#include <limits>

#include <json.hpp>

#include "evpr/binio.hpp"
#include "evpr/error.hpp"
#include "evpr/eval.hpp"

namespace evpr {

namespace {

using nlohmann::json;

// JSON has no NaN/Inf; non-finite values travel as strings.
json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double read_number(const json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw DataError("summary JSON: expected a number, got '" + s + "'");
}

json resolution_value(const std::string& r) {
    char* end = nullptr;
    const double v = std::strtod(r.c_str(), &end);
    if (!r.empty() && end == r.c_str() + r.size() && std::isfinite(v)) return v;
    return r;
}

std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    return format_double(v);
}

}  // namespace

std::string format_report_csv(const EvalReport& report) {
    std::string out = "q_index,q_time_us,j_index,ref_time_us,score,distance_m,correct\n";
    for (const auto& m : report.matches) {
        out += std::to_string(m.q) + "," + std::to_string(to_microseconds(m.q_time)) + "," + std::to_string(m.j) + "," +
               std::to_string(to_microseconds(m.ref_time)) + "," + csv_number(m.score) + "," + csv_number(m.distance_m) +
               "," + (m.correct ? "1" : "0") + "\n";
    }
    return out;
}

std::string format_summary_json(const EvalReport& report) {
    const auto& p = report.provenance;
    json j;
    j["recall_at_1"] = number(report.recall);
    j["tolerance_m"] = number(report.tolerance_m);
    j["n_queries"] = report.n_queries;
    j["n_correct"] = report.n_correct;
    j["group"] = report.group;
    j["provenance"] = {{"reconstruction", p.reconstruction},
                       {"extractor", p.extractor},
                       {"resolution_s", resolution_value(p.resolution)},
                       {"seq_len", p.seq_len},
                       {"matcher", p.matcher},
                       {"members", p.members},
                       {"fingerprint", p.fingerprint}};
    j["comparisons"] = json::array();
    for (const auto& c : report.comparisons) {
        j["comparisons"].push_back({{"a", c.a}, {"b", c.b}, {"n", c.n}, {"mean_a", number(c.mean_a)},
                                    {"mean_b", number(c.mean_b)}, {"t", number(c.t)}, {"p", number(c.p)}});
    }
    j["members"] = json::array();
    for (const auto& m : report.members) j["members"].push_back({{"tag", m.tag}, {"recall_at_1", number(m.recall)}});
    return j.dump(2) + "\n";
}

EvalReport parse_summary_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        EvalReport r;
        r.recall = read_number(j.at("recall_at_1"));
        r.tolerance_m = read_number(j.at("tolerance_m"));
        r.n_queries = j.at("n_queries").get<std::size_t>();
        r.n_correct = j.at("n_correct").get<std::size_t>();
        r.group = j.at("group").get<std::string>();
        const auto& p = j.at("provenance");
        r.provenance.reconstruction = p.at("reconstruction").get<std::string>();
        r.provenance.extractor = p.at("extractor").get<std::string>();
        const auto& res = p.at("resolution_s");
        r.provenance.resolution = res.is_number() ? format_double(res.get<double>()) : res.get<std::string>();
        r.provenance.seq_len = p.at("seq_len").get<int>();
        r.provenance.matcher = p.value("matcher", "none");
        r.provenance.members = p.value("members", std::vector<std::string>{});
        r.provenance.fingerprint = p.value("fingerprint", "");
        for (const auto& c : j.at("comparisons")) {
            r.comparisons.push_back({c.at("a").get<std::string>(), c.at("b").get<std::string>(), c.at("n").get<std::size_t>(),
                                     read_number(c.at("mean_a")), read_number(c.at("mean_b")), read_number(c.at("t")),
                                     read_number(c.at("p"))});
        }
        if (j.contains("members")) {
            for (const auto& m : j.at("members")) r.members.push_back({m.at("tag").get<std::string>(), read_number(m.at("recall_at_1"))});
        }
        return r;
    } catch (const json::exception& e) {
        throw DataError(std::string("summary JSON: ") + e.what());
    }
}

void emit_report(const EvalReport& report, const std::string& stem) {
    binio::write_text(stem + ".csv", format_report_csv(report));
    binio::write_text(stem + ".json", format_summary_json(report));
}

EvalReport load_summary(const std::string& json_path) {
    const auto bytes = binio::read_file(json_path);
    try {
        return parse_summary_json({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
    } catch (const Error& e) {
        rethrow_with_context(e, json_path);
    }
}

}  // namespace evpr
