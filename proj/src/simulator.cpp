#include "evdiv/simulator.hpp"

#include "evdiv/error.hpp"
#include "evdiv/geometry.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace evdiv {

namespace {

// Uniform [0, 1) and standard normal draws built directly on the engine so
// that a seed yields the same run on every standard library.
class SimRng {
public:
    explicit SimRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::int8_t polarity() { return (engine_() >> 63) != 0 ? std::int8_t{1} : std::int8_t{-1}; }

private:
    std::mt19937_64 engine_;
};

}  // namespace

void SimConfig::validate() const {
    if (!(z0 > 0.0) || !std::isfinite(z0)) throw ConfigError(fmt::format("z0 must be positive, got {}", z0));
    if (!(nu <= 0.0) || !std::isfinite(nu)) {
        throw ConfigError(fmt::format("nu must be <= 0 (descent), got {}", nu));
    }
    if (!(focal_length > 0.0)) throw ConfigError("focal length must be positive");
    if (geometry.width < 1 || geometry.height < 1) throw ConfigError("sensor dimensions must be >= 1");
    if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("duration must be positive");
    if (!(z0 + nu * duration > 0.0)) {
        throw ConfigError(fmt::format("cheirality violated: z0 + nu*duration = {} <= 0", z0 + nu * duration));
    }
    if (n_points < 1) throw ConfigError("n_points must be >= 1");
    if (!(event_spacing_px > 0.0)) throw ConfigError("event spacing must be positive");
    if (!(noise_px >= 0.0)) throw ConfigError("noise_px must be >= 0");
    if (!(noise_event_fraction >= 0.0)) throw ConfigError("noise_event_fraction must be >= 0");
}

SimulationResult generate_landing_events(const SimConfig& config) {
    config.validate();
    SimRng rng(config.seed);
    const SensorGeometry& g = config.geometry;
    const Point2 c = image_center(g);
    const double f = config.focal_length;

    SimulationResult out;
    out.stream.geometry = g;
    auto& events = out.stream.events;

    for (std::size_t p = 0; p < config.n_points; ++p) {
        // Image position at t = 0, FOE-centred, and the plane point behind it.
        const double x0 = rng.uniform() * g.width - c.x;
        const double y0 = rng.uniform() * g.height - c.y;
        const double X = x0 * config.z0 / f;
        const double Y = y0 * config.z0 / f;
        const double r0 = std::hypot(x0, y0);
        if (config.nu == 0.0 || r0 == 0.0) continue;

        for (long k = 1;; ++k) {
            const double r = r0 + static_cast<double>(k) * config.event_spacing_px;
            const double t = radius_crossing_time(r0, r, config.z0, config.nu);
            if (t > config.duration) break;
            const double depth = config.z0 + config.nu * t;
            Event e;
            e.t = t;
            e.x = f * X / depth + c.x;
            e.y = f * Y / depth + c.y;
            if (!g.contains(e.x, e.y)) break;
            e.polarity = rng.polarity();
            if (config.noise_px > 0.0) {
                e.x += config.noise_px * rng.normal();
                e.y += config.noise_px * rng.normal();
                if (!g.contains(e.x, e.y)) continue;
            }
            events.push_back(e);
        }
    }
    out.trajectory_events = events.size();

    out.clutter_events = static_cast<std::size_t>(
        std::llround(config.noise_event_fraction * static_cast<double>(out.trajectory_events)));
    for (std::size_t i = 0; i < out.clutter_events; ++i) {
        Event e;
        e.x = std::min(rng.uniform() * g.width, std::nextafter(static_cast<double>(g.width), 0.0));
        e.y = std::min(rng.uniform() * g.height, std::nextafter(static_cast<double>(g.height), 0.0));
        e.t = rng.uniform() * config.duration;
        e.polarity = rng.polarity();
        events.push_back(e);
    }
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });

    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) / kGroundTruthRateHz;
        if (t > config.duration) break;
        out.ground_truth.samples.push_back({t, ground_truth_divergence(config, t)});
    }
    return out;
}

double radius_crossing_time(double r0, double r, double z0, double nu) {
    if (!(nu < 0.0)) throw DomainError("radius only grows under descent (nu < 0)");
    return (z0 / -nu) * (1.0 - r0 / r);
}

double ground_truth_divergence(const SimConfig& config, double t) {
    return continuous_divergence(config.nu, config.z0, t);
}

double normalized_velocity(const SimConfig& config, double t_start) {
    const double depth = config.z0 + config.nu * t_start;
    if (!(depth > 0.0)) throw DomainError(fmt::format("depth {} at t = {} is not positive", depth, t_start));
    return config.nu / depth;
}

}  // namespace evdiv
