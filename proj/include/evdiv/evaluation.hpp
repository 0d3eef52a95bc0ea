#pragma once

#include "evdiv/events.hpp"
#include "evdiv/geometry.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evdiv {

struct FlowVector {
    Point2 position;  // FOE-centred pixel position
    Point2 flow;      // pixels per second
};

/// Sparse optic-flow field over one batch window.
struct FlowField {
    std::vector<FlowVector> vectors;
    Point2 foe;
    double tau = 0.5;
};

struct FlowDivergence {
    double divergence = 0.0;
    std::size_t used = 0;     // vectors that entered the average
    std::size_t skipped = 0;  // vectors at zero radius
};

/// Rate of perceived expansion of a flow field,
///   D = 1/(P tau) * sum_k [1 - |FOE + p_k + tau v_k| / |FOE + p_k|].
/// Vectors with |FOE + p_k| = 0 are left out of both the sum and P.
FlowDivergence of_to_divergence(const FlowField& field);

/// `# foe=<fx>,<fy> tau=<t>` header, then `px,py,vx,vy` rows.
FlowField parse_flow_csv(std::string_view text);

struct BatchError {
    double t = 0.0;
    double percent = 0.0;
};

struct EvaluationReport {
    std::vector<BatchError> per_batch_errors;
    double mean_abs_error_pct = 0.0;
    double mean_runtime_s = 0.0;
    std::size_t excluded = 0;  // estimates with ~0 ground truth or no value
};

/// Percent error of every estimate against the closest-in-time ground truth.
/// Throws ArgumentError if either series is empty or nothing is comparable.
EvaluationReport divergence_error(std::span<const DivergenceSample> estimates,
                                  std::span<const GroundTruthSample> ground_truth);

/// `# t_s,divergence,contrast,bound_gap,iterations,runtime_s` rows. With
/// `include_runtime` false the runtime column is written as 0 so that output
/// depends only on the inputs.
std::string write_estimates_csv(std::span<const DivergenceSample> samples, bool include_runtime = true);

/// Reads rows of at least `t_s,divergence`; contrast, bound_gap, iterations and
/// runtime_s are picked up when present.
std::vector<DivergenceSample> parse_estimates_csv(std::string_view text);

std::string format_report(const EvaluationReport& report);
std::string write_report_csv(const EvaluationReport& report);

}  // namespace evdiv
