#include "evdiv/geometry.hpp"

#include "evdiv/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace evdiv {

double warp_scale(double t, double nu, double tau) {
    const double denom = 1.0 + nu * tau;
    if (!(denom > 0.0)) {
        throw DomainError(fmt::format("warp undefined: 1 + nu*tau = {} for nu = {}, tau = {}", denom, nu, tau));
    }
    return (1.0 + nu * t) / denom;
}

Point2 radial_warp(Point2 centered, double t, double nu, double tau) {
    const double s = warp_scale(t, nu, tau);
    return {centered.x * s, centered.y * s};
}

Point2 warp_event(const Event& e, double nu, double tau, const SensorGeometry& g) {
    const Point2 c = image_center(g);
    const Point2 w = radial_warp({e.x - c.x, e.y - c.y}, e.t, nu, tau);
    return {w.x + c.x, w.y + c.y};
}

VelocityInterval velocity_domain(double tau, double epsilon) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ArgumentError(fmt::format("tau must be positive, got {}", tau));
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw ArgumentError(fmt::format("epsilon must lie in [0, 1), got {}", epsilon));
    }
    return {-(1.0 - epsilon) / tau, 0.0};
}

double divergence_from_velocity(double nu, double tau) {
    const double denom = 1.0 + nu * tau;
    if (!(denom > 0.0)) throw DomainError(fmt::format("1 + nu*tau = {} is not positive", denom));
    return nu / denom;
}

double continuous_divergence(double nu, double z0, double t) {
    const double depth = z0 + nu * t;
    if (!(depth > 0.0)) throw DomainError(fmt::format("depth z0 + nu*t = {} is not positive", depth));
    return nu / depth;
}

}  // namespace evdiv
