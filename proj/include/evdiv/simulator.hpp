#pragma once

#include "evdiv/events.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace evdiv {

/// Camera descending at constant vertical velocity `nu` onto a textured,
/// fronto-parallel plane at initial depth `z0`.
struct SimConfig {
    double z0 = 1.0;
    double nu = -0.3;                 // length units per second, <= 0
    double focal_length = 100.0;      // pixels
    SensorGeometry geometry{160, 90};
    double duration = 2.0;            // seconds
    std::size_t n_points = 2000;
    double event_spacing_px = 1.0;
    double noise_px = 0.0;            // Gaussian jitter stddev
    double noise_event_fraction = 0.0;  // clutter events per trajectory event
    std::uint64_t seed = 1;

    /// Throws ConfigError on any violated invariant.
    void validate() const;
};

struct GroundTruth {
    std::vector<GroundTruthSample> samples;
};

struct SimulationResult {
    EventStream stream;
    GroundTruth ground_truth;
    std::size_t trajectory_events = 0;
    std::size_t clutter_events = 0;
};

/// Ground-truth sampling rate of generated runs.
inline constexpr double kGroundTruthRateHz = 33.0;

/// Scene points are drawn uniformly over the view at t = 0. Each point emits an
/// event every time its image radius has grown by event_spacing_px, at the
/// exact crossing time, until it leaves the sensor or the run ends.
SimulationResult generate_landing_events(const SimConfig& config);

/// Time at which a trajectory with image radius r0 at t = 0 reaches radius r
/// (r >= r0, nu < 0): solves r0 * z0 / (z0 + nu t) = r.
double radius_crossing_time(double r0, double r, double z0, double nu);

/// nu / (z0 + nu t).
double ground_truth_divergence(const SimConfig& config, double t);

/// Velocity after rescaling the depth at `t_start` to one: the value a batch
/// starting at `t_start` should recover.
double normalized_velocity(const SimConfig& config, double t_start);

}  // namespace evdiv
