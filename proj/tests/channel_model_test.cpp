#include <array>
#include <random>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "passfeas/channel_model.hpp"

namespace passfeas {
namespace {

using units::mph_to_mps;

const double kMph55 = mph_to_mps(55);
const double kMph70 = mph_to_mps(70);

TEST(RangeTable, InsideCalibrationPointsAreExact)
{
    const auto t = paper_calibration();
    EXPECT_EQ(t.max_range(Placement::InsideVehicle, Direction::Forward, kMph55), 466.0);
    EXPECT_EQ(t.max_range(Placement::InsideVehicle, Direction::Forward, kMph70), 401.0);
    EXPECT_EQ(t.max_range(Placement::InsideVehicle, Direction::Backward, kMph55), 327.0);
    EXPECT_EQ(t.max_range(Placement::InsideVehicle, Direction::Backward, kMph70), 400.0);
}

TEST(RangeTable, RooftopDefaultIsOneKilometre)
{
    const auto t = paper_calibration();
    EXPECT_EQ(t.max_range(Placement::Rooftop, Direction::Forward, kMph55), 1000.0);
    EXPECT_EQ(t.max_range(Placement::Rooftop, Direction::Backward, kMph55), 1000.0);
}

TEST(RangeTable, MidpointSpeedInterpolatesLinearly)
{
    const auto t = paper_calibration();
    EXPECT_NEAR(t.max_range(Placement::InsideVehicle, Direction::Forward, 27.94), 433.5, 1e-9);
}

TEST(RangeTable, NoExtrapolation)
{
    const auto t = paper_calibration();
    EXPECT_THROW((void)t.max_range(Placement::InsideVehicle, Direction::Forward, kMph55 - 0.01), ExtrapolationError);
    EXPECT_THROW((void)t.max_range(Placement::Rooftop, Direction::Backward, kMph70 + 0.01), ExtrapolationError);
    const auto rooftop_only = asymmetric_rooftop_calibration();
    EXPECT_THROW((void)rooftop_only.max_range(Placement::InsideVehicle, Direction::Forward, kMph55),
                 ExtrapolationError);
}

TEST(RangeTable, RejectsInvalidEntries)
{
    using enum Placement;
    using enum Direction;
    EXPECT_THROW(RangeTable({{Rooftop, Forward, 20.0, 900.0}, {Rooftop, Forward, 20.0, 950.0}}), ValidationError);
    EXPECT_THROW(RangeTable({{Rooftop, Forward, 20.0, 0.0}}), ValidationError);
    EXPECT_THROW(RangeTable({{Rooftop, Forward, -1.0, 10.0}}), ValidationError);
    EXPECT_NO_THROW(RangeTable({{Rooftop, Forward, 20.0, 900.0}, {Rooftop, Backward, 20.0, 900.0}}));
}

TEST(RangeTable, InsideForwardBeatsBackwardAt55)
{
    const auto t = paper_calibration();
    EXPECT_GT(t.max_range(Placement::InsideVehicle, Direction::Forward, kMph55),
              t.max_range(Placement::InsideVehicle, Direction::Backward, kMph55));
}

TEST(RangeTable, RooftopDirectionsAgreeWithinFivePercent)
{
    for (const auto& table : {paper_calibration(), asymmetric_rooftop_calibration()}) {
        for (const double speed : {kMph55, 27.0, 29.5, kMph70}) {
            const double f = table.max_range(Placement::Rooftop, Direction::Forward, speed);
            const double b = table.max_range(Placement::Rooftop, Direction::Backward, speed);
            EXPECT_LE(std::abs(f - b), 0.05 * std::max(f, b));
        }
    }
    const auto asym = asymmetric_rooftop_calibration();
    EXPECT_GE(asym.max_range(Placement::Rooftop, Direction::Backward, kMph55),
              asym.max_range(Placement::Rooftop, Direction::Forward, kMph55));
}

TEST(RangeTable, InterpolationStaysBetweenBrackets)
{
    const auto t = paper_calibration();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> speed(kMph55, kMph70);
    for (const auto p : {Placement::InsideVehicle, Placement::Rooftop}) {
        for (const auto d : {Direction::Forward, Direction::Backward}) {
            const double lo = t.max_range(p, d, kMph55);
            const double hi = t.max_range(p, d, kMph70);
            for (int i = 0; i < 200; ++i) {
                const double s = speed(rng);
                const double r = t.max_range(p, d, s);
                EXPECT_GE(r, std::min(lo, hi));
                EXPECT_LE(r, std::max(lo, hi));
                // Continuity: a tiny speed change moves the range by a bounded amount.
                const double s2 = std::min(kMph70, s + 1e-6);
                EXPECT_NEAR(t.max_range(p, d, s2), r, 1e-6 * std::abs(hi - lo) / (kMph70 - kMph55) + 1e-12);
            }
        }
    }
}

TEST(Terrain, RejectsMalformedProfiles)
{
    EXPECT_THROW(TerrainProfile({{0.0, 0.0}}, 1.5), ValidationError);
    EXPECT_THROW(TerrainProfile({{0.0, 0.0}, {0.0, 1.0}}, 1.5), ValidationError);
    EXPECT_THROW(TerrainProfile({{10.0, 0.0}, {5.0, 1.0}}, 1.5), ValidationError);
}

TEST(Terrain, ElevationInterpolatesAndGuardsSpan)
{
    const TerrainProfile t({{0.0, 0.0}, {100.0, 10.0}, {200.0, 0.0}}, 1.5);
    EXPECT_DOUBLE_EQ(t.elevation(50.0), 5.0);
    EXPECT_DOUBLE_EQ(t.elevation(100.0), 10.0);
    EXPECT_DOUBLE_EQ(t.elevation(150.0), 5.0);
    EXPECT_THROW((void)t.elevation(-0.1), OutOfProfile);
    EXPECT_THROW((void)line_of_sight(t, 0.0, 250.0), OutOfProfile);
}

TEST(LineOfSight, FlatProfileIsAlwaysClear)
{
    const auto flat = TerrainProfile::flat(-500.0, 500.0, 1.5, 12.0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(-500.0, 500.0);
    for (int i = 0; i < 200; ++i) {
        EXPECT_TRUE(line_of_sight(flat, pos(rng), pos(rng)));
    }
    EXPECT_TRUE(line_of_sight(flat.with_antenna_height(0.0), -500.0, 500.0));
}

TEST(LineOfSight, CrestBetweenAntennasBlocks)
{
    const TerrainProfile crest({{0.0, 0.0}, {400.0, 0.0}, {500.0, 8.0}, {600.0, 0.0}, {1000.0, 0.0}}, 1.5);
    EXPECT_FALSE(line_of_sight(crest, 100.0, 900.0));
    EXPECT_TRUE(line_of_sight(crest, 600.0, 900.0));
    EXPECT_TRUE(line_of_sight(crest.with_antenna_height(9.0), 100.0, 900.0));
}

std::vector<std::pair<double, double>> random_profile(std::mt19937_64& rng)
{
    // Integer sample positions so the 0.1 m sampler lands on every breakpoint.
    std::uniform_int_distribution<int> gap(5, 120);
    std::uniform_real_distribution<double> elev(-5.0, 25.0);
    std::uniform_int_distribution<int> count(2, 15);
    std::vector<std::pair<double, double>> pts;
    int x = 0;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        pts.emplace_back(static_cast<double>(x), elev(rng));
        x += gap(rng);
    }
    return pts;
}

TerrainProfile to_profile(const std::vector<std::pair<double, double>>& pts, double antenna)
{
    std::vector<TerrainProfile::Sample> samples;
    for (const auto& [p, e] : pts) {
        samples.push_back({p, e});
    }
    return TerrainProfile(samples, antenna);
}

TEST(LineOfSight, MatchesDenseSamplingOracle)
{
    std::mt19937_64 rng(2024);
    int blocked = 0;
    int clear = 0;
    for (int profile = 0; profile < 60; ++profile) {
        const auto pts = random_profile(rng);
        const double antenna = std::uniform_real_distribution<double>(0.5, 4.0)(rng);
        const auto terrain = to_profile(pts, antenna);
        const int span = static_cast<int>(pts.back().first);
        std::uniform_int_distribution<int> pos(0, span * 10);
        for (int q = 0; q < 20; ++q) {
            const double a = pos(rng) / 10.0;
            const double b = pos(rng) / 10.0;
            const bool expected = oracle::dense_line_of_sight(pts, antenna, a, b);
            EXPECT_EQ(line_of_sight(terrain, a, b), expected) << "profile " << profile << " a=" << a << " b=" << b;
            (expected ? clear : blocked)++;
        }
    }
    EXPECT_GT(blocked, 20);
    EXPECT_GT(clear, 20);
}

TEST(LineOfSight, Symmetric)
{
    std::mt19937_64 rng(99);
    for (int profile = 0; profile < 50; ++profile) {
        const auto pts = random_profile(rng);
        const auto terrain = to_profile(pts, 1.5);
        std::uniform_real_distribution<double> pos(pts.front().first, pts.back().first);
        for (int q = 0; q < 20; ++q) {
            const double a = pos(rng);
            const double b = pos(rng);
            EXPECT_EQ(line_of_sight(terrain, a, b), line_of_sight(terrain, b, a));
        }
    }
}

TEST(Delivery, DeterministicDiskModel)
{
    const ChannelModel m(paper_calibration());
    EXPECT_EQ(delivery_probability(m, Placement::InsideVehicle, Direction::Forward, kMph55, 0.0, true), 1.0);
    EXPECT_EQ(delivery_probability(m, Placement::InsideVehicle, Direction::Forward, kMph55, 466.0, true), 1.0);
    EXPECT_EQ(delivery_probability(m, Placement::InsideVehicle, Direction::Forward, kMph55, 467.0, true), 0.0);
    EXPECT_EQ(delivery_probability(m, Placement::Rooftop, Direction::Forward, kMph55, 10.0, false), 0.0);
    EXPECT_THROW((void)delivery_probability(m, Placement::Rooftop, Direction::Forward, kMph55, -1.0, true),
                 ValidationError);
    EXPECT_THROW((void)delivery_probability(m, Placement::Rooftop, Direction::Forward, 40.0, 1.0, true),
                 ExtrapolationError);
}

TEST(Delivery, LinearEdgeRamp)
{
    const ChannelModel m(paper_calibration(), std::nullopt, LinearEdge{100.0});
    const auto p = [&](double d) {
        return delivery_probability(m, Placement::Rooftop, Direction::Forward, kMph55, d, true);
    };
    EXPECT_EQ(p(900.0), 1.0);
    EXPECT_DOUBLE_EQ(p(950.0), 0.5);
    EXPECT_EQ(p(1000.0), 0.0);
    EXPECT_EQ(p(1200.0), 0.0);
    EXPECT_THROW(ChannelModel(paper_calibration(), std::nullopt, LinearEdge{400.0}), ValidationError);
    EXPECT_THROW(ChannelModel(paper_calibration(), std::nullopt, LinearEdge{-1.0}), ValidationError);
}

TEST(Delivery, NonIncreasingInDistanceAndZeroBeyondRange)
{
    std::mt19937_64 rng(5);
    for (const DeliveryModel model : {DeliveryModel{Deterministic{}}, DeliveryModel{LinearEdge{150.0}}}) {
        const ChannelModel m(paper_calibration(), std::nullopt, model);
        for (const auto p : {Placement::InsideVehicle, Placement::Rooftop}) {
            for (const auto d : {Direction::Forward, Direction::Backward}) {
                const double speed = std::uniform_real_distribution<double>(kMph55, kMph70)(rng);
                const double range = m.max_range(p, d, speed);
                double prev = 1.0;
                for (double dist = 0.0; dist <= 1.5 * range; dist += 2.5) {
                    const double prob = delivery_probability(m, p, d, speed, dist, true);
                    EXPECT_LE(prob, prev);
                    EXPECT_GE(prob, 0.0);
                    EXPECT_EQ(delivery_probability(m, p, d, speed, dist, false), 0.0);
                    if (dist > range) {
                        EXPECT_EQ(prob, 0.0);
                    }
                    prev = prob;
                }
            }
        }
    }
}

TEST(Multihop, NoRelaysIsSingleHop)
{
    const ChannelModel m(paper_calibration());
    EXPECT_EQ(effective_multihop_range(m, {}, Placement::InsideVehicle, kMph55), 466.0);
}

TEST(Multihop, MidwayRelayBridgesInsidePlacementGap)
{
    const ChannelModel m(paper_calibration());
    const std::array<double, 1> relay{300.0};
    // Worst case: the relay transmits backward on the second hop.
    HopOptions opt;
    opt.hop_directions = {Direction::Forward, Direction::Backward};
    const double reach = effective_multihop_range(m, relay, Placement::InsideVehicle, kMph55, opt);
    EXPECT_EQ(reach, 300.0 + 327.0);
    EXPECT_GE(reach, 600.0);
    EXPECT_GT(600.0, m.max_range(Placement::InsideVehicle, Direction::Forward, kMph55));
}

TEST(Multihop, UnreachableRelayBreaksTheChain)
{
    const ChannelModel m(paper_calibration());
    const std::array<double, 2> relays{500.0, 800.0};
    EXPECT_EQ(effective_multihop_range(m, relays, Placement::InsideVehicle, kMph55), 466.0);
    const std::array<double, 2> partial{400.0, 900.0};
    EXPECT_EQ(effective_multihop_range(m, partial, Placement::InsideVehicle, kMph55), 400.0 + 466.0);
}

TEST(Multihop, TerrainBlocksHops)
{
    const TerrainProfile hill({{-100.0, 0.0}, {400.0, 0.0}, {500.0, 30.0}, {600.0, 0.0}, {3000.0, 0.0}}, 1.5);
    const ChannelModel m(paper_calibration(), hill);
    const std::array<double, 1> relay{900.0};
    // The relay is within rooftop range but hidden behind the hill. The source
    // still sees the far slope down to where the ray grazes the crest:
    // (180 - 0.3 x) * 500 = 28.5 x.
    const double reach = effective_multihop_range(m, relay, Placement::Rooftop, kMph55);
    EXPECT_NEAR(reach, 90000.0 / 178.5, kReachScanStep);
    EXPECT_LT(reach, 900.0);
    const ChannelModel flat(paper_calibration(), TerrainProfile::flat(-100.0, 3000.0, 1.5));
    EXPECT_NEAR(effective_multihop_range(flat, relay, Placement::Rooftop, kMph55), 1900.0, 1e-9);
}

TEST(Multihop, RejectsMalformedChains)
{
    const ChannelModel m(paper_calibration());
    const std::array<double, 2> unordered{300.0, 100.0};
    EXPECT_THROW((void)effective_multihop_range(m, unordered, Placement::Rooftop, kMph55), ValidationError);
    HopOptions opt;
    opt.hop_directions = {Direction::Forward};
    const std::array<double, 1> relay{100.0};
    EXPECT_THROW((void)effective_multihop_range(m, relay, Placement::Rooftop, kMph55, opt), ValidationError);
}

} // namespace
} // namespace passfeas
