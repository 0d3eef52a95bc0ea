#pragma once

#include "evdiv/contrast.hpp"
#include "evdiv/error.hpp"
#include "evdiv/events.hpp"
#include "evdiv/geometry.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace evdiv {

struct SolverParams {
    double gamma = 0.025;            // convergence threshold, contrast units
    double tau = 0.5;                // batch duration, seconds
    double epsilon = kDefaultEpsilon;
    long max_iterations = 1'000'000;
    double min_width = 1e-9;         // intervals narrower than this end the search

    /// Throws ArgumentError unless gamma > 0, tau > 0, 0 <= epsilon < 1,
    /// max_iterations >= 1 and min_width >= 0.
    void validate() const;
};

/// Queue element of the branch-and-bound search. `sequence` breaks priority
/// ties first-in first-out.
struct QueueEntry {
    VelocityInterval interval;
    double priority = 0.0;
    std::size_t sequence = 0;
};

struct BnbResult {
    double nu = 0.0;
    double contrast = 0.0;
    /// Best remaining bound minus the incumbent contrast when the search
    /// stopped; zero when every interval was pruned.
    double bound_gap = 0.0;
    long iterations = 0;
    double runtime_s = 0.0;
};

/// Optional record of the search, for inspection and tests.
struct BnbTrace {
    struct Pruned {
        VelocityInterval interval;
        double bound = 0.0;
        double incumbent = 0.0;
    };
    std::vector<double> incumbent_contrast;  // after each iteration
    std::vector<Pruned> pruned;
};

/// Raised when the search exceeds max_iterations. Carries the incumbent.
class IterationLimitError : public Error {
public:
    IterationLimitError(const std::string& what, BnbResult incumbent)
        : Error(what), incumbent_(incumbent) {}
    const BnbResult& incumbent() const noexcept { return incumbent_; }

private:
    BnbResult incumbent_;
};

/// Best-first branch and bound over nu in [-(1-eps)/tau, 0]: returns nu with
/// C(nu) >= max C - gamma. params.tau must equal batch.tau.
BnbResult maximise_contrast_bnb(const EventBatch& batch, const SolverParams& params, BnbTrace* trace = nullptr);

struct GridSearchResult {
    double nu = 0.0;
    double contrast = 0.0;
};

/// Exhaustive evaluation of C on n_points uniform samples of the domain
/// (endpoints included). Returns the first maximiser.
GridSearchResult grid_search_oracle(const EventBatch& batch, const SolverParams& params, std::size_t n_points);

/// Runs the solver on every non-empty batch. Empty batches produce no sample;
/// solver failures are reported in the sample's `error`. `threads` = 0 uses
/// the hardware concurrency. Output order follows the input.
std::vector<DivergenceSample> estimate_stream_divergence(std::span<const EventBatch> batches,
                                                         const SolverParams& params, unsigned threads = 1);

}  // namespace evdiv
