#pragma once

#include "evdiv/events.hpp"

#include <string>

namespace evdiv {

/// Default guard keeping the velocity domain away from the 1 + nu*tau = 0 singularity.
inline constexpr double kDefaultEpsilon = 1e-6;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Closed interval of normalized vertical velocities (depth at batch start = 1).
struct VelocityInterval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const noexcept { return hi - lo; }
    double center() const noexcept { return lo + 0.5 * (hi - lo); }
    bool contains(double nu) const noexcept { return nu >= lo && nu <= hi; }
};

/// A timestamped divergence estimate with solver diagnostics. `error` is empty
/// on success; when set, the remaining fields hold the best incumbent, if any.
struct DivergenceSample {
    double t = 0.0;
    double nu = 0.0;
    double divergence = 0.0;
    double contrast = 0.0;
    double bound_gap = 0.0;
    long iterations = 0;
    double runtime_s = 0.0;
    std::size_t event_count = 0;
    std::string error;

    bool ok() const noexcept { return error.empty(); }
};

/// Scale (1 + nu*t)/(1 + nu*tau) that carries an event observed at time t to
/// the batch end. Throws DomainError when 1 + nu*tau <= 0.
double warp_scale(double t, double nu, double tau);

/// Radial warp of an FOE-centred point observed at time t to the batch end.
Point2 radial_warp(Point2 centered, double t, double nu, double tau);

/// FOE (principal point) of a sensor: the image centre.
inline Point2 image_center(const SensorGeometry& g) {
    return {0.5 * static_cast<double>(g.width), 0.5 * static_cast<double>(g.height)};
}

/// Warps an event given in pixel coordinates and returns pixel coordinates.
/// The FOE sits at the image centre.
Point2 warp_event(const Event& e, double nu, double tau, const SensorGeometry& g);

/// [-(1 - epsilon)/tau, 0]. epsilon = 0 yields the closed (singular) domain.
VelocityInterval velocity_domain(double tau, double epsilon = kDefaultEpsilon);

/// nu / (1 + nu*tau): divergence at the end of a batch whose starting depth is 1.
double divergence_from_velocity(double nu, double tau);

/// nu / (z0 + nu*t).
double continuous_divergence(double nu, double z0, double t);

}  // namespace evdiv
