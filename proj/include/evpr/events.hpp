#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evpr {

/// A single DVS event. `t` is in seconds; parsers convert from microseconds.
struct Event {
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    double t = 0.0;
    std::int8_t p = 1;  // -1 or +1

    friend bool operator==(const Event&, const Event&) = default;
};

struct SensorSize {
    std::uint16_t width = 0;
    std::uint16_t height = 0;

    friend bool operator==(const SensorSize&, const SensorSize&) = default;
};

/// Time-ordered events of one traverse.
struct EventStream {
    std::vector<Event> events;
    SensorSize sensor;
};

struct EventBin {
    std::size_t index = 0;
    std::vector<Event> events;
    double t_start = 0.0;
    double t_end = 0.0;
    bool partial = false;  // trailing remainder of count binning
};

enum class EventFormat { Csv, Binary };

/// Parses a CSV (`t,x,y,p`) or EVPR binary event source. Out-of-order records
/// are stably sorted by timestamp.
EventStream parse_events(std::span<const std::uint8_t> source, EventFormat format, SensorSize sensor);
EventStream load_events(const std::string& path, SensorSize sensor);

/// Picks the format from the leading magic bytes.
EventFormat detect_event_format(std::span<const std::uint8_t> source);

std::string format_events_csv(const EventStream& stream);
std::vector<std::uint8_t> encode_events_binary(const EventStream& stream);
void save_events(const EventStream& stream, const std::string& path, EventFormat format);

std::vector<EventBin> slice_by_count(const EventStream& stream, std::size_t events_per_bin);

/// Half-open windows [t0 + i*dt, t0 + (i+1)*dt). Empty windows are omitted but
/// emitted bins keep their window index.
std::vector<EventBin> slice_by_time(const EventStream& stream, double dt, double t0);

/// Window index of timestamp `t`, consistent with the computed window bounds.
std::size_t time_bin_index(double t, double dt, double t0);

/// Drops every event of pixels whose count exceeds rate_multiple times the
/// mean count over pixels with at least one event.
EventStream filter_hot_pixels(const EventStream& stream, double rate_multiple);

std::int64_t to_microseconds(double seconds);
double from_microseconds(std::int64_t us);

}  // namespace evpr
