#include "evdiv/error.hpp"
#include "evdiv/evaluation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace evdiv {
namespace {

FlowField radial_field(std::mt19937_64& rng, double c, Point2 foe, double tau, int n) {
    std::uniform_real_distribution<double> u(-80.0, 80.0);
    FlowField f;
    f.foe = foe;
    f.tau = tau;
    for (int k = 0; k < n; ++k) {
        const Point2 p{u(rng), u(rng)};
        const double rx = foe.x + p.x, ry = foe.y + p.y;
        f.vectors.push_back({p, {c * rx, c * ry}});
    }
    return f;
}

TEST(OfToDivergence, StaticFieldIsZero) {
    FlowField f;
    f.tau = 0.5;
    f.vectors = {{{3.0, 4.0}, {0.0, 0.0}}, {{-1.0, 2.0}, {0.0, 0.0}}};
    EXPECT_EQ(of_to_divergence(f).divergence, 0.0);
}

TEST(OfToDivergence, SingleVector) {
    FlowField f;
    f.tau = 1.0;
    f.vectors = {{{1.0, 0.0}, {0.5, 0.0}}};
    EXPECT_DOUBLE_EQ(of_to_divergence(f).divergence, -0.5);
}

TEST(OfToDivergence, RadialFieldGivesMinusRate) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uc(-1.5, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double c = uc(rng);
        const auto f = radial_field(rng, c, {5.0, -2.0}, 0.5, 40);
        EXPECT_NEAR(of_to_divergence(f).divergence, -c, 1e-9 * std::max(1.0, std::abs(c)));
    }
}

TEST(OfToDivergence, RotationInvariant) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    FlowField f;
    f.tau = 0.5;
    for (int k = 0; k < 30; ++k) f.vectors.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}});
    const double base = of_to_divergence(f).divergence;
    for (double angle : {0.3, std::numbers::pi / 2, 2.0}) {
        FlowField r = f;
        const double ca = std::cos(angle), sa = std::sin(angle);
        for (auto& v : r.vectors) {
            v.position = {ca * v.position.x - sa * v.position.y, sa * v.position.x + ca * v.position.y};
            v.flow = {ca * v.flow.x - sa * v.flow.y, sa * v.flow.x + ca * v.flow.y};
        }
        EXPECT_NEAR(of_to_divergence(r).divergence, base, 1e-12 * std::max(1.0, std::abs(base)));
    }
}

TEST(OfToDivergence, ZeroRadiusVectorsAreSkipped) {
    FlowField f;
    f.tau = 1.0;
    f.vectors = {{{1.0, 0.0}, {0.5, 0.0}}, {{0.0, 0.0}, {3.0, 3.0}}};
    const auto d = of_to_divergence(f);
    EXPECT_EQ(d.used, 1u);
    EXPECT_EQ(d.skipped, 1u);
    EXPECT_DOUBLE_EQ(d.divergence, -0.5);
    f.vectors.erase(f.vectors.begin());
    EXPECT_THROW(of_to_divergence(f), ArgumentError);
}

TEST(FlowCsv, Parses) {
    const auto f = parse_flow_csv("# foe=80,45 tau=0.5\n1,0,0.5,0\n-2.5,3,0,1\n");
    EXPECT_EQ(f.foe, (Point2{80.0, 45.0}));
    EXPECT_EQ(f.tau, 0.5);
    ASSERT_EQ(f.vectors.size(), 2u);
    EXPECT_EQ(f.vectors[1].position, (Point2{-2.5, 3.0}));
    EXPECT_EQ(f.vectors[1].flow, (Point2{0.0, 1.0}));
    EXPECT_THROW(parse_flow_csv("1,0,0.5,0\n"), ParseError);
    EXPECT_THROW(parse_flow_csv("# foe=0,0 tau=1\n1,0,0.5\n"), ParseError);
    EXPECT_THROW(parse_flow_csv("# foe=0,0 tau=0\n"), ParseError);
}

DivergenceSample estimate_at(double t, double d) {
    DivergenceSample s;
    s.t = t;
    s.divergence = d;
    return s;
}

TEST(DivergenceError, IdenticalSeriesIsZero) {
    const std::vector<GroundTruthSample> gt{{0.5, -0.3}, {1.0, -0.35}, {1.5, -0.41}};
    const std::vector<DivergenceSample> est{estimate_at(0.5, -0.3), estimate_at(1.0, -0.35), estimate_at(1.5, -0.41)};
    const auto r = divergence_error(est, gt);
    EXPECT_EQ(r.mean_abs_error_pct, 0.0);
    EXPECT_EQ(r.per_batch_errors.size(), 3u);
}

TEST(DivergenceError, TenPercent) {
    const std::vector<GroundTruthSample> gt{{1.0, -1.0}};
    const std::vector<DivergenceSample> est{estimate_at(1.0, -0.9)};
    EXPECT_NEAR(divergence_error(est, gt).mean_abs_error_pct, 10.0, 1e-12);
}

TEST(DivergenceError, UsesClosestInTime) {
    const std::vector<GroundTruthSample> gt{{0.0, -1.0}, {1.0, -2.0}, {2.0, -4.0}};
    const std::vector<DivergenceSample> est{estimate_at(0.9, -2.0), estimate_at(1.8, -4.0), estimate_at(0.2, -1.0)};
    EXPECT_EQ(divergence_error(est, gt).mean_abs_error_pct, 0.0);
}

TEST(DivergenceError, ExcludesZeroTruthAndMissingEstimates) {
    const std::vector<GroundTruthSample> gt{{0.0, 0.0}, {1.0, -1.0}};
    const std::vector<DivergenceSample> est{estimate_at(0.0, -0.1), estimate_at(1.0, std::nan("")),
                                            estimate_at(1.0, -1.2)};
    const auto r = divergence_error(est, gt);
    EXPECT_EQ(r.excluded, 2u);
    EXPECT_NEAR(r.mean_abs_error_pct, 20.0, 1e-9);
}

TEST(DivergenceError, EmptyInputsThrow) {
    const std::vector<GroundTruthSample> gt{{1.0, -1.0}};
    const std::vector<DivergenceSample> est{estimate_at(1.0, -0.9)};
    EXPECT_THROW(divergence_error({}, gt), ArgumentError);
    EXPECT_THROW(divergence_error(est, {}), ArgumentError);
    const std::vector<GroundTruthSample> zero{{1.0, 0.0}};
    EXPECT_THROW(divergence_error(est, zero), ArgumentError);
}

TEST(EstimatesCsv, RoundTrip) {
    DivergenceSample s;
    s.t = 0.5;
    s.nu = -0.4;
    s.divergence = -0.5;
    s.contrast = 0.123456789;
    s.bound_gap = 0.01;
    s.iterations = 17;
    s.runtime_s = 0.25;
    const std::vector<DivergenceSample> in{s};
    const auto out = parse_estimates_csv(write_estimates_csv(in));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].t, s.t);
    EXPECT_EQ(out[0].divergence, s.divergence);
    EXPECT_EQ(out[0].contrast, s.contrast);
    EXPECT_EQ(out[0].bound_gap, s.bound_gap);
    EXPECT_EQ(out[0].iterations, s.iterations);
    EXPECT_EQ(out[0].runtime_s, s.runtime_s);
    EXPECT_EQ(parse_estimates_csv(write_estimates_csv(in, false))[0].runtime_s, 0.0);
}

TEST(EstimatesCsv, AcceptsTwoColumnsAndRejectsGarbage) {
    const auto two = parse_estimates_csv("# t_s,divergence\n0.5,-0.3\n");
    ASSERT_EQ(two.size(), 1u);
    EXPECT_EQ(two[0].divergence, -0.3);
    EXPECT_THROW(parse_estimates_csv("0.5\n"), ParseError);
    EXPECT_THROW(parse_estimates_csv("0.5,abc\n"), ParseError);
}

TEST(Report, TextAndCsv) {
    EvaluationReport r;
    r.per_batch_errors = {{0.5, 2.0}, {1.0, 4.0}};
    r.mean_abs_error_pct = 3.0;
    r.mean_runtime_s = 0.1;
    const auto text = format_report(r);
    EXPECT_NE(text.find("mean absolute divergence error: 3.0000 %"), std::string::npos);
    EXPECT_EQ(write_report_csv(r), "# mean_abs_error_pct=3 mean_runtime_s=0.1\n# t_s,error_pct\n0.5,2\n1,4\n");
}

}  // namespace
}  // namespace evdiv
