#include "evdiv/evaluation.hpp"

#include "evdiv/error.hpp"
#include "text_util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <iterator>

namespace evdiv {

using text::parse_number;
using text::split;

namespace {

constexpr double kNearZeroDivergence = 1e-12;

}  // namespace

FlowDivergence of_to_divergence(const FlowField& field) {
    if (!(field.tau > 0.0)) throw ArgumentError(fmt::format("tau must be positive, got {}", field.tau));
    if (field.vectors.empty()) throw ArgumentError("flow field has no vectors");
    FlowDivergence out;
    double acc = 0.0;
    for (const FlowVector& v : field.vectors) {
        const double rx = field.foe.x + v.position.x;
        const double ry = field.foe.y + v.position.y;
        const double radius = std::hypot(rx, ry);
        if (radius == 0.0) {
            ++out.skipped;
            continue;
        }
        const double moved = std::hypot(rx + field.tau * v.flow.x, ry + field.tau * v.flow.y);
        acc += 1.0 - moved / radius;
        ++out.used;
    }
    if (out.used == 0) throw ArgumentError("every flow vector sits at zero radius");
    out.divergence = acc / (static_cast<double>(out.used) * field.tau);
    return out;
}

FlowField parse_flow_csv(std::string_view text) {
    FlowField field;
    bool have_header = false;
    text::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (line.front() == '#') {
            std::string_view foe, tau;
            const auto body = text::trim(line.substr(1));
            if (text::header_value(body, "foe", foe) && text::header_value(body, "tau", tau)) {
                const auto parts = split(foe, ',');
                if (parts.size() != 2 || !parse_number(parts[0], field.foe.x) ||
                    !parse_number(parts[1], field.foe.y) || !parse_number(tau, field.tau) || !(field.tau > 0.0)) {
                    throw ParseError("invalid '# foe=<fx>,<fy> tau=<t>' header", line_no);
                }
                have_header = true;
            }
            return;
        }
        if (!have_header) throw ParseError("flow row before '# foe=<fx>,<fy> tau=<t>' header", line_no);
        const auto fields = split(line, ',');
        FlowVector v;
        if (fields.size() != 4 || !parse_number(fields[0], v.position.x) || !parse_number(fields[1], v.position.y) ||
            !parse_number(fields[2], v.flow.x) || !parse_number(fields[3], v.flow.y)) {
            throw ParseError("expected px,py,vx,vy", line_no);
        }
        field.vectors.push_back(v);
    });
    if (!have_header) throw ParseError("missing '# foe=<fx>,<fy> tau=<t>' header", 0);
    return field;
}

EvaluationReport divergence_error(std::span<const DivergenceSample> estimates,
                                  std::span<const GroundTruthSample> ground_truth) {
    if (estimates.empty()) throw ArgumentError("no estimates to evaluate");
    if (ground_truth.empty()) throw ArgumentError("no ground truth to evaluate against");

    std::vector<GroundTruthSample> gt(ground_truth.begin(), ground_truth.end());
    std::stable_sort(gt.begin(), gt.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
    auto closest = [&gt](double t) -> const GroundTruthSample& {
        auto it = std::lower_bound(gt.begin(), gt.end(), t, [](const auto& s, double v) { return s.t < v; });
        if (it == gt.end()) return gt.back();
        if (it == gt.begin()) return *it;
        const auto prev = std::prev(it);
        return (t - prev->t) <= (it->t - t) ? *prev : *it;
    };

    EvaluationReport report;
    double error_sum = 0.0;
    double runtime_sum = 0.0;
    for (const DivergenceSample& s : estimates) {
        runtime_sum += s.runtime_s;
        const GroundTruthSample& ref = closest(s.t);
        if (std::abs(ref.divergence) < kNearZeroDivergence || !std::isfinite(s.divergence)) {
            ++report.excluded;
            continue;
        }
        const double pct = 100.0 * std::abs(s.divergence - ref.divergence) / std::abs(ref.divergence);
        report.per_batch_errors.push_back({s.t, pct});
        error_sum += pct;
    }
    if (report.per_batch_errors.empty()) throw ArgumentError("no estimate has a non-zero ground truth to compare to");
    report.mean_abs_error_pct = error_sum / static_cast<double>(report.per_batch_errors.size());
    report.mean_runtime_s = runtime_sum / static_cast<double>(estimates.size());
    return report;
}

std::string write_estimates_csv(std::span<const DivergenceSample> samples, bool include_runtime) {
    fmt::memory_buffer out;
    fmt::format_to(std::back_inserter(out), "# t_s,divergence,contrast,bound_gap,iterations,runtime_s\n");
    for (const DivergenceSample& s : samples) {
        fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{}\n", s.t, s.divergence, s.contrast, s.bound_gap,
                       s.iterations, include_runtime ? s.runtime_s : 0.0);
    }
    return fmt::to_string(out);
}

std::vector<DivergenceSample> parse_estimates_csv(std::string_view text) {
    std::vector<DivergenceSample> samples;
    text::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (line.front() == '#') return;
        const auto fields = split(line, ',');
        DivergenceSample s;
        bool ok = fields.size() >= 2 && parse_number(fields[0], s.t) && parse_number(fields[1], s.divergence);
        if (ok && fields.size() >= 6) {
            ok = parse_number(fields[2], s.contrast) && parse_number(fields[3], s.bound_gap) &&
                 parse_number(fields[4], s.iterations) && parse_number(fields[5], s.runtime_s);
        }
        if (!ok) throw ParseError("expected t_s,divergence[,contrast,bound_gap,iterations,runtime_s]", line_no);
        samples.push_back(s);
    });
    return samples;
}

std::string format_report(const EvaluationReport& report) {
    fmt::memory_buffer out;
    fmt::format_to(std::back_inserter(out), "batches evaluated: {}\n", report.per_batch_errors.size());
    if (report.excluded > 0) {
        fmt::format_to(std::back_inserter(out), "batches excluded (zero ground truth or no estimate): {}\n", report.excluded);
    }
    fmt::format_to(std::back_inserter(out), "mean absolute divergence error: {:.4f} %\n", report.mean_abs_error_pct);
    fmt::format_to(std::back_inserter(out), "mean runtime per batch: {:.6f} s\n", report.mean_runtime_s);
    return fmt::to_string(out);
}

std::string write_report_csv(const EvaluationReport& report) {
    fmt::memory_buffer out;
    fmt::format_to(std::back_inserter(out), "# mean_abs_error_pct={} mean_runtime_s={}\n# t_s,error_pct\n",
                   report.mean_abs_error_pct, report.mean_runtime_s);
    for (const auto& e : report.per_batch_errors) fmt::format_to(std::back_inserter(out), "{},{}\n", e.t, e.percent);
    return fmt::to_string(out);
}

}  // namespace evdiv
