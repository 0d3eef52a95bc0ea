#include "evdiv/error.hpp"
#include "evdiv/events.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <random>
#include <string>

namespace evdiv {
namespace {

std::span<const std::byte> as_bytes(const std::string& s) {
    return std::as_bytes(std::span(s.data(), s.size()));
}

EventStream make_stream(SensorGeometry g, std::vector<Event> events) {
    return EventStream{std::move(events), g};
}

TEST(ParseEventCsv, SingleRow) {
    const auto s = parse_event_csv("# width=4 height=4\n0.0,1,2,1\n");
    ASSERT_EQ(s.events.size(), 1u);
    EXPECT_EQ(s.geometry, (SensorGeometry{4, 4}));
    EXPECT_EQ(s.events[0].t, 0.0);
    EXPECT_EQ(s.events[0].x, 1.0);
    EXPECT_EQ(s.events[0].y, 2.0);
    EXPECT_EQ(s.events[0].polarity, 1);
}

TEST(ParseEventCsv, SortsByTime) {
    const auto s = parse_event_csv("# width=4 height=4\n3000000,1,1,1\n1000000,2,2,-1\n");
    ASSERT_EQ(s.events.size(), 2u);
    EXPECT_DOUBLE_EQ(s.events[0].t, 1.0);
    EXPECT_DOUBLE_EQ(s.events[1].t, 3.0);
    EXPECT_EQ(s.events[0].polarity, -1);
}

TEST(ParseEventCsv, OutOfBoundsIsValidationError) {
    EXPECT_THROW(parse_event_csv("# width=4 height=4\n0,10,1,1\n"), ValidationError);
    EXPECT_THROW(parse_event_csv("# width=4 height=4\n0,4,1,1\n"), ValidationError);
    EXPECT_THROW(parse_event_csv("# width=4 height=4\n0,-0.5,1,1\n"), ValidationError);
}

TEST(ParseEventCsv, MalformedRowReportsLine) {
    try {
        parse_event_csv("# width=4 height=4\n0,1,1,1\n5,oops,1,1\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(parse_event_csv("# width=4 height=4\n0,1,1\n"), ParseError);
    EXPECT_THROW(parse_event_csv("# width=4 height=4\n0,1,1,0\n"), ParseError);
    EXPECT_THROW(parse_event_csv("# width=4 height=4\n-5,1,1,1\n"), ParseError);
    EXPECT_THROW(parse_event_csv("0,1,1,1\n"), ParseError);
    EXPECT_THROW(parse_event_csv("# width=0 height=4\n"), ParseError);
}

TEST(ParseEventCsv, EmptyInputIsEmptyStream) {
    EXPECT_TRUE(parse_event_csv("").events.empty());
    const auto s = parse_event_csv("# width=8 height=6\n");
    EXPECT_TRUE(s.events.empty());
    EXPECT_EQ(s.geometry, (SensorGeometry{8, 6}));
    EXPECT_TRUE(parse_event_bin({}).events.empty());
}

TEST(EventFiles, BinaryRoundTrip) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<float> ux(0.0f, 31.9f), uy(0.0f, 15.9f);
    EventStream s;
    s.geometry = {32, 16};
    for (int i = 0; i < 200; ++i) {
        s.events.push_back({ux(rng), uy(rng), i * 1e-3, static_cast<std::int8_t>(i % 2 ? 1 : -1)});
    }
    const auto bytes = write_event_bin(s);
    ASSERT_EQ(bytes.size(), 20u + 17u * 200u);
    EXPECT_EQ(std::memcmp(bytes.data(), "EVD1", 4), 0);
    const auto back = parse_event_file(bytes, EventFormat::bin);
    EXPECT_EQ(back.geometry, s.geometry);
    ASSERT_EQ(back.events.size(), s.events.size());
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        EXPECT_EQ(back.events[i].x, s.events[i].x);
        EXPECT_EQ(back.events[i].y, s.events[i].y);
        EXPECT_NEAR(back.events[i].t, s.events[i].t, 1e-12);
        EXPECT_EQ(back.events[i].polarity, s.events[i].polarity);
    }
    // Same content through the CSV path.
    const auto csv = parse_event_file(as_bytes(write_event_csv(back)), EventFormat::csv);
    ASSERT_EQ(csv.events.size(), back.events.size());
    for (std::size_t i = 0; i < csv.events.size(); ++i) EXPECT_EQ(csv.events[i], back.events[i]);
}

TEST(EventFiles, BinaryRejectsTruncation) {
    EventStream s;
    s.geometry = {4, 4};
    s.events.push_back({1, 1, 0, 1});
    auto bytes = write_event_bin(s);
    bytes.pop_back();
    EXPECT_THROW(parse_event_bin(bytes), ParseError);
    bytes = write_event_bin(s);
    bytes[0] = std::byte{'X'};
    EXPECT_THROW(parse_event_bin(bytes), ParseError);
}

TEST(RemoveHotPixels, UniformCountsUnchanged) {
    std::vector<Event> ev;
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
            for (int k = 0; k < 3; ++k) ev.push_back({x + 0.5, y + 0.5, 0.01 * k, 1});
    const auto s = make_stream({4, 4}, ev);
    EXPECT_EQ(remove_hot_pixels(s, 10.0).events, s.events);
}

TEST(RemoveHotPixels, RemovesOutlierPixel) {
    // Nonzero counts {1,1,1,2,2,2,1000}: median 2, |c - 2| = {1,1,1,0,0,0,998},
    // MAD 1, threshold 2 + 5*1 = 7, so only the 1000-event pixel goes.
    std::vector<Event> ev;
    const int counts[7] = {1, 1, 1, 2, 2, 2, 1000};
    for (int p = 0; p < 7; ++p)
        for (int k = 0; k < counts[p]; ++k) ev.push_back({p + 0.25, 0.5, 1e-4 * k, 1});
    std::stable_sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
    const auto out = remove_hot_pixels(make_stream({8, 1}, ev), 5.0);
    EXPECT_EQ(out.events.size(), 9u);
    for (const auto& e : out.events) EXPECT_LT(e.x, 6.0);
    EXPECT_TRUE(std::is_sorted(out.events.begin(), out.events.end(),
                               [](const Event& a, const Event& b) { return a.t < b.t; }));
    EXPECT_EQ(remove_hot_pixels(out, 5.0).events, out.events);
}

TEST(RemoveHotPixels, EmptyStream) {
    EXPECT_TRUE(remove_hot_pixels(make_stream({4, 4}, {}), 10.0).events.empty());
}

TEST(RescaleEvents, RatioSubstitution) {
    const auto s = make_stream({1280, 760}, {{640, 380, 0.5, 1}, {1279.999, 0, 0.7, -1}});
    const auto out = rescale_events(s, {160, 90});
    EXPECT_EQ(out.geometry, (SensorGeometry{160, 90}));
    EXPECT_DOUBLE_EQ(out.events[0].x, 80.0);
    EXPECT_DOUBLE_EQ(out.events[0].y, 45.0);
    EXPECT_NEAR(out.events[1].x, 159.999875, 1e-9);
    EXPECT_LT(out.events[1].x, 160.0);
    EXPECT_EQ(out.events[1].t, 0.7);
}

TEST(RescaleEvents, IdentityAndClamp) {
    const auto s = make_stream({7, 3}, {{6.9999999999999991, 2.9999999999999996, 0, 1}});
    EXPECT_EQ(rescale_events(s, {7, 3}).events, s.events);
    const auto up = rescale_events(s, {21, 9});
    EXPECT_LT(up.events[0].x, 21.0);
    EXPECT_LT(up.events[0].y, 9.0);
    EXPECT_THROW(rescale_events(s, {0, 3}), ArgumentError);
}

TEST(SubsampleEvents, FullFractionIsIdentity) {
    const auto s = make_stream({4, 4}, {{1, 1, 0, 1}, {2, 2, 1, 1}});
    EXPECT_EQ(subsample_events(s, 1.0, 3).events, s.events);
    EXPECT_THROW(subsample_events(s, 0.0, 3), ArgumentError);
    EXPECT_THROW(subsample_events(s, 1.5, 3), ArgumentError);
}

TEST(SubsampleEvents, BinomialCountAndDeterminism) {
    std::vector<Event> ev(100000);
    for (std::size_t i = 0; i < ev.size(); ++i) ev[i] = {1.0, 1.0, i * 1e-5, 1};
    const auto s = make_stream({4, 4}, ev);
    const auto a = subsample_events(s, 0.25, 42);
    // Binomial(1e5, 0.25): mean 25000, sd ~137; the window is about +-7 sd.
    EXPECT_GE(a.events.size(), 24000u);
    EXPECT_LE(a.events.size(), 26000u);
    EXPECT_EQ(subsample_events(s, 0.25, 42).events, a.events);
    EXPECT_NE(subsample_events(s, 0.25, 43).events, a.events);
    EXPECT_TRUE(std::is_sorted(a.events.begin(), a.events.end(),
                               [](const Event& x, const Event& y) { return x.t < y.t; }));
}

TEST(BatchStream, WindowsAnchoredAtZero) {
    const auto batches = batch_stream(make_stream({4, 4}, {{1, 1, 0.1, 1}, {1, 1, 0.6, 1}}), 0.5);
    ASSERT_EQ(batches.size(), 2u);
    EXPECT_EQ(batches[0].size(), 1u);
    EXPECT_EQ(batches[1].size(), 1u);
    EXPECT_NEAR(batches[0].events[0].t, 0.1, 1e-12);
    EXPECT_NEAR(batches[1].events[0].t, 0.1, 1e-12);
    EXPECT_DOUBLE_EQ(batches[1].t_start, 0.5);
    EXPECT_DOUBLE_EQ(batches[1].t_end(), 1.0);
}

TEST(BatchStream, EmptyAndSpan) {
    EXPECT_TRUE(batch_stream(make_stream({4, 4}, {}), 0.5).empty());
    const auto batches = batch_stream(make_stream({4, 4}, {{1, 1, 0.0, 1}, {1, 1, 1.2, 1}}), 0.5);
    ASSERT_EQ(batches.size(), 3u);
    EXPECT_TRUE(batches[1].empty());
    EXPECT_THROW(batch_stream(make_stream({4, 4}, {}), 0.0), ArgumentError);
}

TEST(BatchStream, PartitionsRandomStreams) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_real_distribution<double> ut(0.0, 10.0);
        std::vector<Event> ev(500);
        for (auto& e : ev) e = {1.0, 1.0, ut(rng), 1};
        std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
        const double tau = 0.1 + 0.05 * trial;
        const auto batches = batch_stream(make_stream({2, 2}, ev), tau);
        std::size_t total = 0;
        for (const auto& b : batches) {
            total += b.size();
            for (const auto& e : b.events) {
                EXPECT_GE(e.t, 0.0);
                EXPECT_LE(e.t, tau);
            }
            EXPECT_TRUE(std::is_sorted(b.events.begin(), b.events.end(),
                                       [](const Event& x, const Event& y) { return x.t < y.t; }));
        }
        EXPECT_EQ(total, ev.size());
    }
}

TEST(GroundTruthCsv, RoundTrip) {
    const std::vector<GroundTruthSample> gt = {{0.0, -0.2}, {1.0 / 33.0, -0.21}};
    const auto back = parse_ground_truth_csv(write_ground_truth_csv(gt));
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].t, gt[1].t);
    EXPECT_EQ(back[1].divergence, gt[1].divergence);
    EXPECT_THROW(parse_ground_truth_csv("0.1\n"), ParseError);
}

}  // namespace
}  // namespace evdiv
