#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evdiv {

/// One asynchronous sensor sample. Coordinates are real-valued pixels so that
/// rescaled streams keep sub-pixel positions; time is in seconds.
struct Event {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
    std::int8_t polarity = 1;

    friend bool operator==(const Event&, const Event&) = default;
};

struct SensorGeometry {
    int width = 1;
    int height = 1;

    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    bool contains(double x, double y) const noexcept {
        return x >= 0.0 && y >= 0.0 && x < width && y < height;
    }

    friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

/// Time-ordered events plus the sensor they came from.
struct EventStream {
    std::vector<Event> events;
    SensorGeometry geometry;
};

/// A window of the stream with timestamps shifted so that 0 <= t <= tau.
/// `t_start` is the absolute time of the window start.
struct EventBatch {
    std::vector<Event> events;
    double tau = 0.5;
    double t_start = 0.0;
    SensorGeometry geometry;

    std::size_t size() const noexcept { return events.size(); }
    bool empty() const noexcept { return events.empty(); }
    double t_end() const noexcept { return t_start + tau; }
};

enum class EventFormat { csv, bin };

/// Picks the format from a file name: `.bin` selects the binary layout, anything else CSV.
EventFormat format_from_path(std::string_view path);

/// Throws ValidationError if any event lies outside the geometry or carries a
/// non-finite coordinate, negative time, or polarity other than +/-1.
void validate_events(std::span<const Event> events, const SensorGeometry& geometry);

EventStream parse_event_file(std::span<const std::byte> bytes, EventFormat format);
EventStream parse_event_csv(std::string_view text);
EventStream parse_event_bin(std::span<const std::byte> bytes);

std::string write_event_csv(const EventStream& stream);
std::vector<std::byte> write_event_bin(const EventStream& stream);

/// Reads a whole file; throws Error if it cannot be opened.
std::vector<std::byte> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::byte> bytes);
void write_file_text(const std::string& path, std::string_view text);

EventStream load_event_file(const std::string& path);
void save_event_file(const std::string& path, const EventStream& stream);

/// Drops every event of pixels whose count exceeds median + k*MAD of the
/// nonzero per-pixel counts. The MAD is floored at one count.
EventStream remove_hot_pixels(const EventStream& stream, double k = 10.0);

/// Scales coordinates into a new sensor size.
EventStream rescale_events(const EventStream& stream, const SensorGeometry& target);

/// Keeps each event independently with probability `keep_fraction`.
EventStream subsample_events(const EventStream& stream, double keep_fraction, std::uint64_t seed);

/// Splits the stream into consecutive windows [k*tau, (k+1)*tau) anchored at
/// absolute time zero, from the window of the first event to the window of the
/// last. Intermediate windows may be empty.
std::vector<EventBatch> batch_stream(const EventStream& stream, double tau);

/// One row of a ground-truth divergence file.
struct GroundTruthSample {
    double t = 0.0;
    double divergence = 0.0;
};

std::vector<GroundTruthSample> parse_ground_truth_csv(std::string_view text);
std::string write_ground_truth_csv(std::span<const GroundTruthSample> samples);

}  // namespace evdiv
