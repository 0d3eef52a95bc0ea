#include "evdiv/events.hpp"

#include "evdiv/error.hpp"
#include "text_util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <unordered_map>

namespace evdiv {

using text::header_value;
using text::parse_number;
using text::split;
using text::trim;

namespace {

constexpr char kBinMagic[4] = {'E', 'V', 'D', '1'};
constexpr std::size_t kBinHeaderSize = 4 + 4 + 4 + 8;
constexpr std::size_t kBinRecordSize = 8 + 4 + 4 + 1;

void sort_by_time(std::vector<Event>& events) {
    const bool sorted = std::is_sorted(events.begin(), events.end(),
                                       [](const Event& a, const Event& b) { return a.t < b.t; });
    if (!sorted) {
        std::stable_sort(events.begin(), events.end(),
                         [](const Event& a, const Event& b) { return a.t < b.t; });
    }
}

template <typename T>
void put_le(std::vector<std::byte>& out, T value) {
    auto bits = std::bit_cast<std::array<std::byte, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    out.insert(out.end(), bits.begin(), bits.end());
}

template <typename T>
T get_le(std::span<const std::byte> bytes, std::size_t offset) {
    std::array<std::byte, sizeof(T)> bits{};
    std::memcpy(bits.data(), bytes.data() + offset, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    return std::bit_cast<T>(bits);
}

std::int64_t to_microseconds(double t) {
    return static_cast<std::int64_t>(std::llround(t * 1e6));
}

}  // namespace

EventFormat format_from_path(std::string_view path) {
    return path.ends_with(".bin") ? EventFormat::bin : EventFormat::csv;
}

void validate_events(std::span<const Event> events, const SensorGeometry& geometry) {
    if (geometry.width < 1 || geometry.height < 1) {
        throw ValidationError(fmt::format("invalid sensor geometry {}x{}", geometry.width, geometry.height));
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        if (!std::isfinite(e.x) || !std::isfinite(e.y) || !std::isfinite(e.t)) {
            throw ValidationError(fmt::format("event {}: non-finite value", i));
        }
        if (e.t < 0.0) throw ValidationError(fmt::format("event {}: negative timestamp", i));
        if (e.polarity != 1 && e.polarity != -1) {
            throw ValidationError(fmt::format("event {}: polarity must be +1 or -1", i));
        }
        if (!geometry.contains(e.x, e.y)) {
            throw ValidationError(fmt::format("event {}: ({}, {}) outside {}x{} sensor", i, e.x, e.y,
                                              geometry.width, geometry.height));
        }
    }
}

EventStream parse_event_file(std::span<const std::byte> bytes, EventFormat format) {
    if (format == EventFormat::bin) return parse_event_bin(bytes);
    return parse_event_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

EventStream parse_event_csv(std::string_view text) {
    EventStream stream;
    bool have_header = false;
    text::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (line.front() == '#') {
            std::string_view w, h;
            const auto body = trim(line.substr(1));
            if (header_value(body, "width", w) && header_value(body, "height", h)) {
                if (!parse_number(w, stream.geometry.width) || !parse_number(h, stream.geometry.height) ||
                    stream.geometry.width < 1 || stream.geometry.height < 1) {
                    throw ParseError("invalid sensor geometry header", line_no);
                }
                have_header = true;
            }
            return;
        }
        if (!have_header) throw ParseError("event row before '# width=<W> height=<H>' header", line_no);

        const auto fields = split(line, ',');
        if (fields.size() != 4) {
            throw ParseError(fmt::format("expected 4 fields t_us,x,y,p, got {}", fields.size()), line_no);
        }
        double t_us = 0.0;
        Event e;
        int polarity = 0;
        if (!parse_number(fields[0], t_us) || !std::isfinite(t_us) || t_us < 0.0) {
            throw ParseError("bad timestamp", line_no);
        }
        if (!parse_number(fields[1], e.x) || !parse_number(fields[2], e.y)) {
            throw ParseError("bad coordinate", line_no);
        }
        if (!parse_number(fields[3], polarity) || (polarity != 1 && polarity != -1)) {
            throw ParseError("polarity must be 1 or -1", line_no);
        }
        e.t = t_us * 1e-6;
        e.polarity = static_cast<std::int8_t>(polarity);
        stream.events.push_back(e);
    });
    validate_events(stream.events, stream.geometry);
    sort_by_time(stream.events);
    return stream;
}

EventStream parse_event_bin(std::span<const std::byte> bytes) {
    EventStream stream;
    if (bytes.empty()) return stream;
    if (bytes.size() < kBinHeaderSize || std::memcmp(bytes.data(), kBinMagic, 4) != 0) {
        throw ParseError("missing EVD1 header", 0);
    }
    const auto width = get_le<std::uint32_t>(bytes, 4);
    const auto height = get_le<std::uint32_t>(bytes, 8);
    const auto count = get_le<std::uint64_t>(bytes, 12);
    constexpr auto max_dim = static_cast<std::uint32_t>(std::numeric_limits<int>::max());
    if (width < 1 || height < 1 || width > max_dim || height > max_dim) {
        throw ParseError("invalid sensor geometry", 0);
    }
    if (count > (bytes.size() - kBinHeaderSize) / kBinRecordSize ||
        bytes.size() != kBinHeaderSize + count * kBinRecordSize) {
        throw ParseError(fmt::format("size {} does not match {} records", bytes.size(), count), 0);
    }
    stream.geometry = {static_cast<int>(width), static_cast<int>(height)};
    stream.events.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::size_t off = kBinHeaderSize + i * kBinRecordSize;
        Event e;
        e.t = static_cast<double>(get_le<std::uint64_t>(bytes, off)) * 1e-6;
        e.x = get_le<float>(bytes, off + 8);
        e.y = get_le<float>(bytes, off + 12);
        e.polarity = get_le<std::int8_t>(bytes, off + 16);
        if (e.polarity != 1 && e.polarity != -1) throw ParseError(fmt::format("record {}: bad polarity", i), 0);
        stream.events.push_back(e);
    }
    validate_events(stream.events, stream.geometry);
    sort_by_time(stream.events);
    return stream;
}

std::string write_event_csv(const EventStream& stream) {
    fmt::memory_buffer out;
    fmt::format_to(std::back_inserter(out), "# width={} height={}\n# t_us,x,y,p\n", stream.geometry.width,
                   stream.geometry.height);
    for (const Event& e : stream.events) {
        fmt::format_to(std::back_inserter(out), "{},{},{},{}\n", to_microseconds(e.t), e.x, e.y,
                       static_cast<int>(e.polarity));
    }
    return fmt::to_string(out);
}

std::vector<std::byte> write_event_bin(const EventStream& stream) {
    std::vector<std::byte> out;
    out.reserve(kBinHeaderSize + stream.events.size() * kBinRecordSize);
    for (char c : kBinMagic) out.push_back(static_cast<std::byte>(c));
    put_le(out, static_cast<std::uint32_t>(stream.geometry.width));
    put_le(out, static_cast<std::uint32_t>(stream.geometry.height));
    put_le(out, static_cast<std::uint64_t>(stream.events.size()));
    for (const Event& e : stream.events) {
        put_le(out, static_cast<std::uint64_t>(to_microseconds(e.t)));
        // Narrowing to f32 may round up to the sensor edge; keep it strictly inside.
        float x = static_cast<float>(e.x);
        float y = static_cast<float>(e.y);
        if (x >= static_cast<float>(stream.geometry.width)) x = std::nextafter(static_cast<float>(stream.geometry.width), 0.0f);
        if (y >= static_cast<float>(stream.geometry.height)) y = std::nextafter(static_cast<float>(stream.geometry.height), 0.0f);
        put_le(out, x);
        put_le(out, y);
        put_le(out, e.polarity);
    }
    return out;
}

std::vector<std::byte> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::vector<char> chars((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::byte> bytes(chars.size());
    std::memcpy(bytes.data(), chars.data(), chars.size());
    return bytes;
}

void write_file_bytes(const std::string& path, std::span<const std::byte> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + path);
}

void write_file_text(const std::string& path, std::string_view text) {
    write_file_bytes(path, std::as_bytes(std::span(text.data(), text.size())));
}

EventStream load_event_file(const std::string& path) {
    return parse_event_file(read_file_bytes(path), format_from_path(path));
}

void save_event_file(const std::string& path, const EventStream& stream) {
    if (format_from_path(path) == EventFormat::bin) {
        write_file_bytes(path, write_event_bin(stream));
    } else {
        write_file_text(path, write_event_csv(stream));
    }
}

EventStream remove_hot_pixels(const EventStream& stream, double k) {
    if (stream.events.empty()) return stream;
    const auto& g = stream.geometry;
    auto pixel_of = [&](const Event& e) {
        const auto px = std::clamp(static_cast<int>(std::floor(e.x)), 0, g.width - 1);
        const auto py = std::clamp(static_cast<int>(std::floor(e.y)), 0, g.height - 1);
        return static_cast<std::size_t>(py) * static_cast<std::size_t>(g.width) + static_cast<std::size_t>(px);
    };

    std::unordered_map<std::size_t, std::size_t> counts;
    for (const Event& e : stream.events) ++counts[pixel_of(e)];

    std::vector<double> values;
    values.reserve(counts.size());
    for (const auto& [pixel, n] : counts) values.push_back(static_cast<double>(n));

    auto median = [](std::vector<double> v) {
        const auto mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
        const double upper = v[mid];
        if (v.size() % 2 == 1) return upper;
        const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        return 0.5 * (lower + upper);
    };

    const double med = median(values);
    std::vector<double> deviations(values.size());
    std::transform(values.begin(), values.end(), deviations.begin(),
                   [med](double v) { return std::abs(v - med); });
    const double mad = std::max(median(deviations), 1.0);
    const double threshold = med + k * mad;

    EventStream out;
    out.geometry = g;
    out.events.reserve(stream.events.size());
    for (const Event& e : stream.events) {
        if (static_cast<double>(counts[pixel_of(e)]) <= threshold) out.events.push_back(e);
    }
    return out;
}

EventStream rescale_events(const EventStream& stream, const SensorGeometry& target) {
    if (target.width < 1 || target.height < 1) {
        throw ArgumentError(fmt::format("invalid target geometry {}x{}", target.width, target.height));
    }
    if (target == stream.geometry) return stream;
    const double sx = static_cast<double>(target.width) / stream.geometry.width;
    const double sy = static_cast<double>(target.height) / stream.geometry.height;
    const double max_x = std::nextafter(static_cast<double>(target.width), 0.0);
    const double max_y = std::nextafter(static_cast<double>(target.height), 0.0);

    EventStream out;
    out.geometry = target;
    out.events = stream.events;
    for (Event& e : out.events) {
        e.x = std::clamp(e.x * sx, 0.0, max_x);
        e.y = std::clamp(e.y * sy, 0.0, max_y);
    }
    return out;
}

EventStream subsample_events(const EventStream& stream, double keep_fraction, std::uint64_t seed) {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
        throw ArgumentError(fmt::format("keep fraction {} not in (0, 1]", keep_fraction));
    }
    if (keep_fraction == 1.0) return stream;

    // splitmix64: a fixed, platform-independent stream for a given seed.
    std::uint64_t state = seed;
    auto next = [&state] {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };

    EventStream out;
    out.geometry = stream.geometry;
    out.events.reserve(static_cast<std::size_t>(static_cast<double>(stream.events.size()) * keep_fraction) + 16);
    for (const Event& e : stream.events) {
        const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
        if (u < keep_fraction) out.events.push_back(e);
    }
    return out;
}

std::vector<EventBatch> batch_stream(const EventStream& stream, double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ArgumentError(fmt::format("tau must be positive, got {}", tau));
    std::vector<EventBatch> batches;
    if (stream.events.empty()) return batches;

    auto window_of = [tau](double t) { return static_cast<std::int64_t>(std::floor(t / tau)); };
    const std::int64_t first = window_of(stream.events.front().t);
    const std::int64_t last = window_of(stream.events.back().t);
    batches.resize(static_cast<std::size_t>(last - first + 1));
    for (std::size_t i = 0; i < batches.size(); ++i) {
        batches[i].tau = tau;
        batches[i].geometry = stream.geometry;
        batches[i].t_start = static_cast<double>(first + static_cast<std::int64_t>(i)) * tau;
    }
    for (const Event& e : stream.events) {
        auto& batch = batches[static_cast<std::size_t>(window_of(e.t) - first)];
        Event shifted = e;
        shifted.t = std::clamp(e.t - batch.t_start, 0.0, tau);
        batch.events.push_back(shifted);
    }
    return batches;
}

std::vector<GroundTruthSample> parse_ground_truth_csv(std::string_view text) {
    std::vector<GroundTruthSample> samples;
    text::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (line.front() == '#') return;
        const auto fields = split(line, ',');
        GroundTruthSample s;
        if (fields.size() < 2 || !parse_number(fields[0], s.t) || !parse_number(fields[1], s.divergence)) {
            throw ParseError("expected t_s,divergence", line_no);
        }
        samples.push_back(s);
    });
    std::stable_sort(samples.begin(), samples.end(),
                     [](const GroundTruthSample& a, const GroundTruthSample& b) { return a.t < b.t; });
    return samples;
}

std::string write_ground_truth_csv(std::span<const GroundTruthSample> samples) {
    fmt::memory_buffer out;
    fmt::format_to(std::back_inserter(out), "# t_s,divergence\n");
    for (const auto& s : samples) fmt::format_to(std::back_inserter(out), "{},{}\n", s.t, s.divergence);
    return fmt::to_string(out);
}

}  // namespace evdiv
