#include "evpr/events.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_map>

#include "evpr/binio.hpp"
#include "evpr/error.hpp"

namespace evpr {

namespace {

constexpr std::string_view kEventMagic = "EVPR";
constexpr std::uint16_t kEventVersion = 1;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && !s.empty();
}

std::int8_t decode_polarity(long long raw, const std::string& where) {
    switch (raw) {
    case 1: return 1;
    case -1:
    case 0: return -1;
    default: throw DataError(where + ": polarity " + std::to_string(raw) + " outside {-1, +1, 0/1}");
    }
}

void check_bounds(const Event& e, SensorSize sensor, const std::string& where) {
    if (e.x >= sensor.width || e.y >= sensor.height) {
        throw DataError(where + ": coordinate (" + std::to_string(e.x) + ", " + std::to_string(e.y) +
                        ") outside " + std::to_string(sensor.width) + "x" + std::to_string(sensor.height) +
                        " sensor");
    }
}

void sort_stream(std::vector<Event>& events) {
    if (!std::is_sorted(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; })) {
        std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
    }
}

EventStream parse_csv(std::span<const std::uint8_t> source, SensorSize sensor) {
    std::string_view text(reinterpret_cast<const char*>(source.data()), source.size());
    EventStream stream;
    bool microseconds = false;
    std::size_t line_no = 0;
    std::uint16_t max_x = 0, max_y = 0;

    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto body = trim(line.substr(1));
            if (body.starts_with("units=")) {
                auto unit = trim(body.substr(6));
                if (unit == "us") microseconds = true;
                else if (unit == "s") microseconds = false;
                else throw DataError("line " + std::to_string(line_no) + ": unknown units '" + std::string(unit) + "'");
            }
            continue;
        }

        std::string_view fields[4];
        std::size_t n = 0;
        std::string_view rest = line;
        while (n < 4) {
            const auto comma = rest.find(',');
            fields[n++] = rest.substr(0, comma);
            if (comma == std::string_view::npos) {
                rest = {};
                break;
            }
            rest = rest.substr(comma + 1);
        }
        const std::string where = "line " + std::to_string(line_no);
        if (n != 4 || !rest.empty()) throw DataError(where + ": expected 4 fields 't,x,y,p'");

        Event e;
        if (microseconds) {
            std::int64_t us = 0;
            if (!parse_number(fields[0], us) || us < 0) throw DataError(where + ": bad microsecond timestamp");
            e.t = from_microseconds(us);
        } else {
            if (!parse_number(fields[0], e.t) || !(e.t >= 0.0) || !std::isfinite(e.t)) {
                throw DataError(where + ": bad timestamp");
            }
        }
        long long x = 0, y = 0, p = 0;
        if (!parse_number(fields[1], x) || !parse_number(fields[2], y) || x < 0 || y < 0 || x > 65535 ||
            y > 65535) {
            throw DataError(where + ": bad pixel coordinate");
        }
        if (!parse_number(fields[3], p)) throw DataError(where + ": bad polarity");
        e.x = static_cast<std::uint16_t>(x);
        e.y = static_cast<std::uint16_t>(y);
        e.p = decode_polarity(p, where);
        if (sensor.width != 0) check_bounds(e, sensor, where);
        max_x = std::max(max_x, e.x);
        max_y = std::max(max_y, e.y);
        stream.events.push_back(e);
    }

    if (sensor.width == 0 || sensor.height == 0) {
        sensor = stream.events.empty() ? SensorSize{}
                                       : SensorSize{static_cast<std::uint16_t>(max_x + 1),
                                                    static_cast<std::uint16_t>(max_y + 1)};
    }
    stream.sensor = sensor;
    sort_stream(stream.events);
    return stream;
}

EventStream parse_binary(std::span<const std::uint8_t> source, SensorSize sensor) {
    binio::Reader r(source, "event binary");
    r.expect_magic(kEventMagic);
    if (const auto v = r.u16(); v != kEventVersion) throw DataError("event binary: unsupported version " + std::to_string(v));
    SensorSize header{r.u16(), r.u16()};
    const std::uint64_t count = r.u64();
    if (sensor.width != 0 && !(sensor == header)) {
        throw DataError("event binary: header dims " + std::to_string(header.width) + "x" +
                        std::to_string(header.height) + " differ from configured sensor");
    }
    constexpr std::size_t kRecord = 13;
    if (r.remaining() / kRecord < count) throw DataError("event binary: truncated payload (" + std::to_string(count) + " records declared)");

    EventStream stream;
    stream.sensor = header;
    stream.events.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::size_t off = r.offset();
        const std::uint64_t us = r.u64();
        Event e;
        e.t = from_microseconds(static_cast<std::int64_t>(us));
        e.x = r.u16();
        e.y = r.u16();
        const std::string where = "record " + std::to_string(i) + " (offset " + std::to_string(off) + ")";
        e.p = decode_polarity(r.i8(), where);
        check_bounds(e, header, where);
        stream.events.push_back(e);
    }
    sort_stream(stream.events);
    return stream;
}

}  // namespace

std::int64_t to_microseconds(double seconds) { return std::llround(seconds * 1e6); }
double from_microseconds(std::int64_t us) { return static_cast<double>(us) * 1e-6; }

EventFormat detect_event_format(std::span<const std::uint8_t> source) {
    if (source.size() >= 4 && std::equal(kEventMagic.begin(), kEventMagic.end(), source.begin(),
                                         [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
        return EventFormat::Binary;
    }
    return EventFormat::Csv;
}

EventStream parse_events(std::span<const std::uint8_t> source, EventFormat format, SensorSize sensor) {
    return format == EventFormat::Csv ? parse_csv(source, sensor) : parse_binary(source, sensor);
}

EventStream load_events(const std::string& path, SensorSize sensor) {
    const auto bytes = binio::read_file(path);
    try {
        return parse_events(bytes, detect_event_format(bytes), sensor);
    } catch (const Error& e) {
        rethrow_with_context(e, path);
    }
}

std::string format_events_csv(const EventStream& stream) {
    std::string out = "# units=us\n";
    out.reserve(stream.events.size() * 24);
    for (const auto& e : stream.events) {
        out += std::to_string(to_microseconds(e.t));
        out += ',';
        out += std::to_string(e.x);
        out += ',';
        out += std::to_string(e.y);
        out += e.p > 0 ? ",1\n" : ",-1\n";
    }
    return out;
}

std::vector<std::uint8_t> encode_events_binary(const EventStream& stream) {
    binio::Writer w;
    w.magic(kEventMagic);
    w.u16(kEventVersion);
    w.u16(stream.sensor.width);
    w.u16(stream.sensor.height);
    w.u64(stream.events.size());
    for (const auto& e : stream.events) {
        w.u64(static_cast<std::uint64_t>(to_microseconds(e.t)));
        w.u16(e.x);
        w.u16(e.y);
        w.i8(e.p);
    }
    return w.take();
}

void save_events(const EventStream& stream, const std::string& path, EventFormat format) {
    if (format == EventFormat::Csv) binio::write_text(path, format_events_csv(stream));
    else binio::write_file(path, encode_events_binary(stream));
}

std::vector<EventBin> slice_by_count(const EventStream& stream, std::size_t events_per_bin) {
    if (events_per_bin == 0) throw ConfigError("slice_by_count: events per bin must be >= 1");
    std::vector<EventBin> bins;
    const auto& ev = stream.events;
    for (std::size_t start = 0, i = 0; start < ev.size(); start += events_per_bin, ++i) {
        const std::size_t end = std::min(ev.size(), start + events_per_bin);
        EventBin bin;
        bin.index = i;
        bin.events.assign(ev.begin() + static_cast<std::ptrdiff_t>(start), ev.begin() + static_cast<std::ptrdiff_t>(end));
        bin.t_start = bin.events.front().t;
        bin.t_end = bin.events.back().t;
        bin.partial = end - start < events_per_bin;
        bins.push_back(std::move(bin));
    }
    return bins;
}

std::size_t time_bin_index(double t, double dt, double t0) {
    auto i = static_cast<std::int64_t>(std::floor((t - t0) / dt));
    i = std::max<std::int64_t>(i, 0);
    // correct for rounding so that t0 + i*dt <= t < t0 + (i+1)*dt with the same arithmetic as the bounds
    while (i > 0 && t < t0 + static_cast<double>(i) * dt) --i;
    while (t >= t0 + static_cast<double>(i + 1) * dt) ++i;
    return static_cast<std::size_t>(i);
}

std::vector<EventBin> slice_by_time(const EventStream& stream, double dt, double t0) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("slice_by_time: window duration must be > 0");
    const auto& ev = stream.events;
    if (!ev.empty() && t0 > ev.front().t) throw ConfigError("slice_by_time: t0 is after the first event");

    std::vector<EventBin> bins;
    for (const auto& e : ev) {
        const std::size_t i = time_bin_index(e.t, dt, t0);
        if (bins.empty() || bins.back().index != i) {
            EventBin bin;
            bin.index = i;
            bin.t_start = t0 + static_cast<double>(i) * dt;
            bin.t_end = t0 + static_cast<double>(i + 1) * dt;
            bins.push_back(std::move(bin));
        }
        bins.back().events.push_back(e);
    }
    return bins;
}

EventStream filter_hot_pixels(const EventStream& stream, double rate_multiple) {
    if (!(rate_multiple > 0.0)) throw ConfigError("filter_hot_pixels: rate multiple must be > 0");
    if (stream.events.empty()) return stream;

    const auto key = [](const Event& e) { return (static_cast<std::uint32_t>(e.y) << 16) | e.x; };
    std::unordered_map<std::uint32_t, std::size_t> counts;
    for (const auto& e : stream.events) ++counts[key(e)];

    const double mean = static_cast<double>(stream.events.size()) / static_cast<double>(counts.size());
    const double threshold = rate_multiple * mean;

    EventStream out;
    out.sensor = stream.sensor;
    out.events.reserve(stream.events.size());
    for (const auto& e : stream.events) {
        if (static_cast<double>(counts[key(e)]) <= threshold) out.events.push_back(e);
    }
    return out;
}

}  // namespace evpr
