#include "evdiv/solver.hpp"

#include "evdiv/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <thread>

namespace evdiv {

namespace {

struct LowerPriority {
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
        if (a.priority != b.priority) return a.priority < b.priority;
        return a.sequence > b.sequence;
    }
};

void check_batch(const EventBatch& batch, const SolverParams& params) {
    params.validate();
    if (std::abs(batch.tau - params.tau) > 1e-12 * std::max(1.0, params.tau)) {
        throw ArgumentError(fmt::format("batch duration {} does not match solver tau {}", batch.tau, params.tau));
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void SolverParams::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ArgumentError(fmt::format("gamma must be positive, got {}", gamma));
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ArgumentError(fmt::format("tau must be positive, got {}", tau));
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ArgumentError(fmt::format("epsilon must lie in [0, 1), got {}", epsilon));
    if (max_iterations < 1) throw ArgumentError("max_iterations must be at least 1");
    if (!(min_width >= 0.0)) throw ArgumentError("min_width must be non-negative");
}

BnbResult maximise_contrast_bnb(const EventBatch& batch, const SolverParams& params, BnbTrace* trace) {
    const auto start = std::chrono::steady_clock::now();
    check_batch(batch, params);
    if (batch.empty()) throw ArgumentError("no events");

    ContrastEvaluator eval(batch);
    const VelocityInterval root = velocity_domain(params.tau, params.epsilon);

    BnbResult best;
    best.nu = root.center();
    best.contrast = eval.contrast(best.nu);

    std::priority_queue<QueueEntry, std::vector<QueueEntry>, LowerPriority> queue;
    std::size_t sequence = 0;
    queue.push({root, eval.bound(root).c_bar, sequence++});

    bool stopped = false;
    while (!queue.empty()) {
        const QueueEntry top = queue.top();
        queue.pop();
        best.bound_gap = top.priority - best.contrast;
        if (best.bound_gap <= params.gamma || top.interval.width() < params.min_width) {
            stopped = true;
            break;
        }
        if (best.iterations >= params.max_iterations) {
            best.runtime_s = seconds_since(start);
            throw IterationLimitError(
                fmt::format("no gamma-certificate after {} iterations (gap {})", best.iterations, best.bound_gap), best);
        }
        ++best.iterations;

        const double center = top.interval.center();
        const double c = eval.contrast(center);
        if (c >= best.contrast) {
            best.nu = center;
            best.contrast = c;
        }
        if (trace) trace->incumbent_contrast.push_back(best.contrast);

        const VelocityInterval halves[2] = {{top.interval.lo, center}, {center, top.interval.hi}};
        for (const auto& half : halves) {
            const double bound = eval.bound(half).c_bar;
            if (bound >= best.contrast) {
                queue.push({half, bound, sequence++});
            } else if (trace) {
                trace->pruned.push_back({half, bound, best.contrast});
            }
        }
    }
    best.bound_gap = stopped ? std::max(best.bound_gap, 0.0) : 0.0;
    best.runtime_s = seconds_since(start);
    return best;
}

GridSearchResult grid_search_oracle(const EventBatch& batch, const SolverParams& params, std::size_t n_points) {
    check_batch(batch, params);
    if (n_points < 2) throw ArgumentError("grid search needs at least 2 points");
    ContrastEvaluator eval(batch);
    const VelocityInterval domain = velocity_domain(params.tau, params.epsilon);
    GridSearchResult best{domain.lo, -std::numeric_limits<double>::infinity()};
    const double step = domain.width() / static_cast<double>(n_points - 1);
    for (std::size_t k = 0; k < n_points; ++k) {
        const double nu = k + 1 == n_points ? domain.hi : domain.lo + static_cast<double>(k) * step;
        const double c = eval.contrast(nu);
        if (c > best.contrast) best = {nu, c};
    }
    return best;
}

std::vector<DivergenceSample> estimate_stream_divergence(std::span<const EventBatch> batches,
                                                         const SolverParams& params, unsigned threads) {
    params.validate();
    std::vector<std::size_t> work;
    for (std::size_t i = 0; i < batches.size(); ++i) {
        if (!batches[i].empty()) work.push_back(i);
    }
    std::vector<DivergenceSample> samples(work.size());

    auto solve_one = [&](std::size_t slot) {
        const EventBatch& batch = batches[work[slot]];
        DivergenceSample& s = samples[slot];
        s.t = batch.t_end();
        s.event_count = batch.size();
        auto fill = [&](const BnbResult& r) {
            s.nu = r.nu;
            s.divergence = divergence_from_velocity(r.nu, params.tau);
            s.contrast = r.contrast;
            s.bound_gap = r.bound_gap;
            s.iterations = r.iterations;
            s.runtime_s = r.runtime_s;
        };
        try {
            fill(maximise_contrast_bnb(batch, params));
        } catch (const IterationLimitError& e) {
            fill(e.incumbent());
            s.error = e.what();
        } catch (const std::exception& e) {
            s.nu = s.divergence = s.contrast = s.bound_gap = std::numeric_limits<double>::quiet_NaN();
            s.error = e.what();
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, work.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < work.size(); ++i) solve_one(i);
        return samples;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < threads; ++k) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < work.size(); i = next++) solve_one(i);
            });
        }
    }
    return samples;
}

}  // namespace evdiv
