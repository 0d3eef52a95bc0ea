#include "evdiv/contrast.hpp"

#include "evdiv/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>

namespace evdiv {

namespace {

// Visits every sensor pixel whose closed square [i, i+1] x [j, j+1] meets the
// closed segment p0-p1. Sweeps the columns spanned by the segment and, within
// each column, the rows spanned by the clipped piece.
template <typename Visit>
void for_each_supercover_pixel(Point2 p0, Point2 p1, const SensorGeometry& g, Visit&& visit) {
    if (p0 == p1) {
        if (g.contains(p0.x, p0.y)) visit(static_cast<int>(std::floor(p0.x)), static_cast<int>(std::floor(p0.y)));
        return;
    }
    if (p1.x < p0.x) std::swap(p0, p1);

    const double max_col = static_cast<double>(g.width - 1);
    const double max_row = static_cast<double>(g.height - 1);
    const double col_lo = std::max(0.0, std::ceil(p0.x) - 1.0);
    const double col_hi = std::min(max_col, std::floor(p1.x));
    if (col_lo > col_hi) return;
    if (std::max(p0.y, p1.y) < 0.0 || std::min(p0.y, p1.y) > static_cast<double>(g.height)) return;

    const double dx = p1.x - p0.x;
    const double slope = dx > 0.0 ? (p1.y - p0.y) / dx : 0.0;
    auto y_at = [&](double x) {
        if (x == p0.x) return p0.y;
        if (x == p1.x) return p1.y;
        return p0.y + (x - p0.x) * slope;
    };

    for (int i = static_cast<int>(col_lo); i <= static_cast<int>(col_hi); ++i) {
        double y_lo, y_hi;
        if (dx > 0.0) {
            const double ya = y_at(std::max(p0.x, static_cast<double>(i)));
            const double yb = y_at(std::min(p1.x, static_cast<double>(i) + 1.0));
            y_lo = std::min(ya, yb);
            y_hi = std::max(ya, yb);
        } else {
            y_lo = std::min(p0.y, p1.y);
            y_hi = std::max(p0.y, p1.y);
        }
        const double row_lo = std::clamp(std::ceil(y_lo) - 1.0, 0.0, max_row + 1.0);
        const double row_hi = std::min(max_row, std::floor(y_hi));
        for (int j = static_cast<int>(row_lo); static_cast<double>(j) <= row_hi; ++j) visit(i, j);
    }
}

double checked_denominator(double nu, double tau) {
    const double denom = 1.0 + nu * tau;
    if (!(denom > 0.0)) {
        throw DomainError(fmt::format("warp undefined: 1 + nu*tau = {} for nu = {}, tau = {}", denom, nu, tau));
    }
    return denom;
}

}  // namespace

EventImage::EventImage(SensorGeometry geometry) : geometry_(geometry) {
    if (geometry.width < 1 || geometry.height < 1) {
        throw ArgumentError(fmt::format("invalid image geometry {}x{}", geometry.width, geometry.height));
    }
    counts_.assign(geometry.pixel_count(), 0.0);
}

void EventImage::increment(int x, int y) {
    counts_.at(index(x, y)) += 1.0;
    ++in_image_events_;
}

void EventImage::add_constant(double value) {
    for (double& c : counts_) c += value;
}

double EventImage::sum() const { return std::accumulate(counts_.begin(), counts_.end(), 0.0); }

double EventImage::sum_of_squares() const {
    return std::transform_reduce(counts_.begin(), counts_.end(), 0.0, std::plus<>{},
                                 [](double c) { return c * c; });
}

EventImage accumulate_image(const EventBatch& batch, double nu) {
    return ContrastEvaluator(batch).image(nu);
}

double image_contrast(const EventImage& image) {
    const auto m = static_cast<double>(image.geometry().pixel_count());
    const double mean = image.sum() / m;
    double acc = 0.0;
    for (double c : image.counts()) acc += (c - mean) * (c - mean);
    return acc / m;
}

double image_contrast_expanded(const EventImage& image) {
    const auto m = static_cast<double>(image.geometry().pixel_count());
    const double mu = image.sum() / m;
    return image.sum_of_squares() / m - mu * mu;
}

std::vector<Pixel> rasterize_segment(Point2 p0, Point2 p1, const SensorGeometry& geometry) {
    std::vector<Pixel> out;
    for_each_supercover_pixel(p0, p1, geometry, [&](int x, int y) { out.push_back({x, y}); });
    std::sort(out.begin(), out.end());
    return out;
}

EventImage upper_bound_image(const EventBatch& batch, VelocityInterval interval) {
    return ContrastEvaluator(batch).upper_bound_image(interval);
}

ContrastBound bound_terms(const EventBatch& batch, VelocityInterval interval) {
    return ContrastEvaluator(batch).bound(interval);
}

std::string to_pgm(const EventImage& image) {
    const auto& g = image.geometry();
    const auto counts = image.counts();
    const double peak = counts.empty() ? 0.0 : *std::max_element(counts.begin(), counts.end());
    const auto maxval = std::max<long long>(1, std::llround(peak));
    fmt::memory_buffer out;
    fmt::format_to(std::back_inserter(out), "P2\n{} {}\n{}\n", g.width, g.height, maxval);
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const auto v = std::clamp<long long>(std::llround(counts[image.index(x, y)]), 0, maxval);
            fmt::format_to(std::back_inserter(out), "{}{}", x == 0 ? "" : " ", v);
        }
        out.push_back('\n');
    }
    return fmt::to_string(out);
}

ContrastEvaluator::ContrastEvaluator(const EventBatch& batch)
    : geometry_(batch.geometry), center_(image_center(batch.geometry)), tau_(batch.tau) {
    if (!(tau_ > 0.0)) throw ArgumentError(fmt::format("batch duration must be positive, got {}", tau_));
    if (geometry_.width < 1 || geometry_.height < 1) {
        throw ArgumentError(fmt::format("invalid batch geometry {}x{}", geometry_.width, geometry_.height));
    }
    cx_.reserve(batch.size());
    cy_.reserve(batch.size());
    t_.reserve(batch.size());
    for (const Event& e : batch.events) {
        cx_.push_back(e.x - center_.x);
        cy_.push_back(e.y - center_.y);
        t_.push_back(e.t);
    }
    scratch_.assign(geometry_.pixel_count(), 0.0);
}

double ContrastEvaluator::assemble(std::size_t in_image) const {
    const auto m = static_cast<double>(geometry_.pixel_count());
    const double mu = static_cast<double>(in_image) / m;
    return scratch_sum_sq_ / m - mu * mu;
}

void ContrastEvaluator::reset_scratch() {
    for (std::size_t idx : touched_) scratch_[idx] = 0.0;
    touched_.clear();
    scratch_sum_sq_ = 0.0;
}

double ContrastEvaluator::contrast(double nu) {
    const double denom = checked_denominator(nu, tau_);
    reset_scratch();
    std::size_t in_image = 0;
    const auto width = static_cast<std::size_t>(geometry_.width);
    for (std::size_t i = 0; i < cx_.size(); ++i) {
        const double s = (1.0 + nu * t_[i]) / denom;
        const double x = cx_[i] * s + center_.x;
        const double y = cy_[i] * s + center_.y;
        if (!geometry_.contains(x, y)) continue;
        const std::size_t idx = static_cast<std::size_t>(std::floor(y)) * width + static_cast<std::size_t>(std::floor(x));
        double& c = scratch_[idx];
        if (c == 0.0) touched_.push_back(idx);
        scratch_sum_sq_ += 2.0 * c + 1.0;
        c += 1.0;
        ++in_image;
    }
    return assemble(in_image);
}

ContrastBound ContrastEvaluator::bound(VelocityInterval interval) {
    const double denom_lo = checked_denominator(interval.lo, tau_);
    const double denom_hi = checked_denominator(interval.hi, tau_);
    reset_scratch();
    std::size_t fully_inside = 0;
    const auto width = static_cast<std::size_t>(geometry_.width);
    auto bump = [&](int x, int y) {
        const std::size_t idx = static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x);
        double& c = scratch_[idx];
        if (c == 0.0) touched_.push_back(idx);
        scratch_sum_sq_ += 2.0 * c + 1.0;
        c += 1.0;
    };
    for (std::size_t i = 0; i < cx_.size(); ++i) {
        const double s_lo = (1.0 + interval.lo * t_[i]) / denom_lo;
        const double s_hi = (1.0 + interval.hi * t_[i]) / denom_hi;
        const Point2 a{cx_[i] * s_lo + center_.x, cy_[i] * s_lo + center_.y};
        const Point2 b{cx_[i] * s_hi + center_.x, cy_[i] * s_hi + center_.y};
        if (geometry_.contains(a.x, a.y) && geometry_.contains(b.x, b.y)) ++fully_inside;
        for_each_supercover_pixel(a, b, geometry_, bump);
    }
    ContrastBound out;
    out.s_bar = scratch_sum_sq_;
    out.mu_lower = static_cast<double>(fully_inside) / static_cast<double>(geometry_.pixel_count());
    out.c_bar = assemble(fully_inside);
    return out;
}

EventImage ContrastEvaluator::image(double nu) const {
    const double denom = checked_denominator(nu, tau_);
    EventImage img(geometry_);
    for (std::size_t i = 0; i < cx_.size(); ++i) {
        const double s = (1.0 + nu * t_[i]) / denom;
        const double x = cx_[i] * s + center_.x;
        const double y = cy_[i] * s + center_.y;
        if (geometry_.contains(x, y)) img.increment(static_cast<int>(std::floor(x)), static_cast<int>(std::floor(y)));
    }
    return img;
}

EventImage ContrastEvaluator::upper_bound_image(VelocityInterval interval) const {
    const double denom_lo = checked_denominator(interval.lo, tau_);
    const double denom_hi = checked_denominator(interval.hi, tau_);
    EventImage img(geometry_);
    for (std::size_t i = 0; i < cx_.size(); ++i) {
        const double s_lo = (1.0 + interval.lo * t_[i]) / denom_lo;
        const double s_hi = (1.0 + interval.hi * t_[i]) / denom_hi;
        const Point2 a{cx_[i] * s_lo + center_.x, cy_[i] * s_lo + center_.y};
        const Point2 b{cx_[i] * s_hi + center_.x, cy_[i] * s_hi + center_.y};
        for_each_supercover_pixel(a, b, geometry_, [&](int x, int y) { img.increment(x, y); });
    }
    return img;
}

}  // namespace evdiv
