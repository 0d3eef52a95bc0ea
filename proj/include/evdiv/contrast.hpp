#pragma once

#include "evdiv/events.hpp"
#include "evdiv/geometry.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace evdiv {

struct Pixel {
    int x = 0;
    int y = 0;

    friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

/// Dense per-pixel accumulation grid, row-major.
class EventImage {
public:
    explicit EventImage(SensorGeometry geometry);

    const SensorGeometry& geometry() const noexcept { return geometry_; }
    std::span<const double> counts() const noexcept { return counts_; }
    double at(int x, int y) const { return counts_.at(index(x, y)); }
    std::size_t in_image_events() const noexcept { return in_image_events_; }

    /// Adds one event to pixel (x, y).
    void increment(int x, int y);
    /// Adds `value` to every pixel without touching the event count. Used to
    /// probe shift invariance of the contrast.
    void add_constant(double value);

    double sum() const;
    double sum_of_squares() const;
    /// in_image_events / M.
    double mean() const noexcept {
        return static_cast<double>(in_image_events_) / static_cast<double>(geometry_.pixel_count());
    }

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(geometry_.width) + static_cast<std::size_t>(x);
    }

private:
    SensorGeometry geometry_;
    std::vector<double> counts_;
    std::size_t in_image_events_ = 0;
};

/// Interval bound on the contrast: c_bar = s_bar / M - mu_lower^2.
struct ContrastBound {
    double s_bar = 0.0;
    double mu_lower = 0.0;
    double c_bar = 0.0;
};

/// Motion-compensated image: each event is warped to the batch end and binned
/// by flooring its pixel coordinates. Warps landing outside the sensor are dropped.
EventImage accumulate_image(const EventBatch& batch, double nu);

/// Variance of the pixel grid, (1/M) sum (H - mean)^2, computed in two passes
/// around the grid sum.
double image_contrast(const EventImage& image);

/// Same quantity via (1/M) sum H^2 - mu^2 with mu = in_image_events / M.
double image_contrast_expanded(const EventImage& image);

/// Pixels whose closed unit squares intersect the closed segment p0-p1,
/// clipped to the sensor and sorted by (x, y). A degenerate segment yields the
/// pixel containing the point, if it lies on the sensor.
std::vector<Pixel> rasterize_segment(Point2 p0, Point2 p1, const SensorGeometry& geometry);

/// For each event, counts every pixel crossed by the segment between its warps
/// at the two ends of the interval. Dominates accumulate_image pixelwise for
/// every nu inside the interval.
EventImage upper_bound_image(const EventBatch& batch, VelocityInterval interval);

ContrastBound bound_terms(const EventBatch& batch, VelocityInterval interval);

/// Plain-text PGM (P2), maxval = max(1, max count).
std::string to_pgm(const EventImage& image);

/// Evaluates contrast and its interval bound for one batch, reusing scratch
/// buffers between calls. Not safe for concurrent use; give each thread its own.
class ContrastEvaluator {
public:
    explicit ContrastEvaluator(const EventBatch& batch);

    std::size_t event_count() const noexcept { return cx_.size(); }
    double tau() const noexcept { return tau_; }
    const SensorGeometry& geometry() const noexcept { return geometry_; }

    /// Contrast at nu, in the expanded form (bit-identical to bound(nu, nu).c_bar).
    double contrast(double nu);
    ContrastBound bound(VelocityInterval interval);

    EventImage image(double nu) const;
    EventImage upper_bound_image(VelocityInterval interval) const;

private:
    double assemble(std::size_t in_image) const;
    void reset_scratch();

    SensorGeometry geometry_;
    Point2 center_;
    double tau_;
    std::vector<double> cx_;
    std::vector<double> cy_;
    std::vector<double> t_;

    std::vector<double> scratch_;
    std::vector<std::size_t> touched_;
    double scratch_sum_sq_ = 0.0;
};

}  // namespace evdiv
