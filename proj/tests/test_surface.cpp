#include <gtest/gtest.h>

#include <random>

#include "loomlab/surface.hpp"
#include "oracles.hpp"

using namespace loomlab;

namespace {

LoomSurfaceSpec make_spec(std::initializer_list<HalfPlaneSpec> entries) {
    LoomSurfaceSpec spec;
    spec.entries = entries;
    return spec;
}

double brute_gap(double s1, double h1, double s2, double h2) {
    const ChartCircle a = boundary_circle(s1, h1), b = boundary_circle(s2, h2);
    const auto inner = [&](double t1) {
        const auto p = oracle::semicircle_point(a.center, a.radius, t1);
        return oracle::golden_min(
            [&](double t2) { return oracle::uhp_distance(p, oracle::semicircle_point(b.center, b.radius, t2)); }, -60, 60);
    };
    return oracle::golden_min(inner, -60, 60);
}

} // namespace

TEST(Crossing, ClosedFormsAgree) {
    for (int i = 1; i <= 100; ++i) {
        const double h = kHalfPi * i / 101.0;
        ASSERT_NEAR(crossing_slack(h), crossing_slack_cosh_form(h), 1e-12 * std::max(1.0, crossing_slack(h)));
        ASSERT_NEAR(height_for_slack(crossing_slack(h)), h, 1e-9);
    }
    EXPECT_NEAR(crossing_slack(kPi / 4), std::log(2.0), 1e-15);
    EXPECT_NEAR(crossing_slack(0.5), 0.261168480887445, 1e-12);
    EXPECT_LT(crossing_slack(1e-6), 1e-11);
    EXPECT_THROW(crossing_slack(0), Error);
    EXPECT_THROW(crossing_slack(kHalfPi), Error);
}

TEST(Validate, IncreasingGaps) {
    const auto spec = make_spec({{0, 0.3}, {10, 0.3}, {30, 0.3}, {60, 0.3}});
    const auto rep = validate(spec);
    EXPECT_TRUE(rep.ok);
    EXPECT_TRUE(rep.gaps_increasing);
    ASSERT_EQ(rep.gaps.size(), 3u);
    EXPECT_NEAR(rep.gaps[0], brute_gap(0, 0.3, 10, 0.3), 1e-6);
    EXPECT_NEAR(rep.gaps[1], brute_gap(10, 0.3, 30, 0.3), 1e-6);
    EXPECT_NEAR(rep.sup_h, 0.3, 0);
    EXPECT_NEAR(rep.min_boundary_distance, rep.gaps[0], 1e-12);
}

TEST(Validate, Overlap) {
    const auto rep = validate(make_spec({{0, 0.3}, {0.1, 0.3}}));
    EXPECT_FALSE(rep.ok);
    EXPECT_FALSE(rep.disjoint);
    ASSERT_TRUE(rep.offending_pair);
    EXPECT_EQ(rep.offending_pair->first, 1);
    EXPECT_EQ(rep.offending_pair->second, 2);
    try {
        LoomSurface bad(make_spec({{0, 0.3}, {0.1, 0.3}}));
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::validation);
    }
}

TEST(Validate, SingleAndBadEntries) {
    EXPECT_TRUE(validate(make_spec({{0, kPi / 4}})).ok);
    EXPECT_FALSE(validate(make_spec({{0, 1.6}})).ok);
    EXPECT_FALSE(validate(make_spec({{5, 0.3}, {0, 0.3}})).ok);
    EXPECT_THROW(validate(LoomSurfaceSpec{}), Error);
    // non-increasing gaps are reported but not fatal
    const auto rep = validate(make_spec({{0, 0.3}, {30, 0.3}, {40, 0.3}}));
    EXPECT_TRUE(rep.ok);
    EXPECT_FALSE(rep.gaps_increasing);
}

TEST(Surface, TauIsBandRealPartAndLipschitz) {
    EXPECT_EQ(tau({{2, 0.3}, 0}), 2);
    EXPECT_EQ(tau({{-1.5, 0}, 1}), -1.5);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> x(-10, 10), y(-1.55, 1.55);
    for (int i = 0; i < 10000; ++i) {
        const BandPoint p{x(rng), y(rng)}, q{x(rng), y(rng)};
        ASSERT_LE(std::abs(p.x - q.x), dist(p, q) + 1e-9);
    }
}

TEST(Surface, ExcisedIndexAndCandidates) {
    const LoomSurface surf(make_spec({{0, 0.5}, {10, 0.5}}));
    EXPECT_EQ(surf.excised_index(band_to_complex({0, 0.8})), 1);
    EXPECT_EQ(surf.excised_index(band_to_complex({10, 1.0})), 2);
    EXPECT_EQ(surf.excised_index(band_to_complex({5, 1.0})), 0);
    EXPECT_EQ(surf.excised_index(band_to_complex({0, -1.0})), 0);
    EXPECT_TRUE(surf.in_closure({0, 0.5}));
    int hits = 0;
    surf.for_each_candidate(-1e9, 1e9, [&](int) { ++hits; });
    EXPECT_EQ(hits, 2);
    hits = 0;
    surf.for_each_candidate(1, 2, [&](int) { ++hits; });
    EXPECT_EQ(hits, 0);
}

TEST(Surface, SheetDistance) {
    const LoomSurface surf(make_spec({{0, 0.4}, {12, 0.6}, {40, 0.9}}));
    for (int k = 1; k <= 3; ++k) {
        const auto& e = surf.entry(k);
        EXPECT_NEAR(sheet_distance({e.s, e.h}, surf), 0, 1e-9);
        EXPECT_LE(sheet_distance({e.s, 0}, surf), 2 * std::atanh(std::sin(e.h)) + 1e-12);
        // the bound is attained: the reflection of (s,0) is straight above it
        EXPECT_NEAR(sheet_distance({e.s, 0}, surf), 2 * dist({e.s, 0}, {e.s, e.h}), 1e-9);
    }
    EXPECT_THROW(sheet_distance({0, 1.0}, surf), Error);
}

TEST(Surface, DistalSheetDistanceBoundedBelow) {
    std::vector<double> h(8, 0.5);
    LoomSurfaceSpec spec;
    spec.entries = schedule_positions(h, 2.0);
    const LoomSurface surf(spec);
    double inf = 1e300;
    for (double t = -5; t < spec.entries.back().s + 5; t += 0.05) inf = std::min(inf, sheet_distance({t, 0}, surf));
    EXPECT_GT(inf, 0.5);
}

TEST(Designers, SummableInverse) {
    const auto res = design_summable(DecayRule::parse("inverse:1"), 20);
    EXPECT_TRUE(validate(res.spec).ok);
    EXPECT_TRUE(validate(res.spec).gaps_increasing);
    double direct = 0;
    for (int k = 1; k <= 20; ++k) direct += -2 * std::log(std::cos(1.0 / k));
    EXPECT_NEAR(res.partial_sums.back(), direct, 1e-12);
    EXPECT_LT(res.partial_sums.back(), 3.3);
    EXPECT_TRUE(res.summable_trend);
    for (int k = 1; k <= 20; ++k) EXPECT_DOUBLE_EQ(res.spec.entries[k - 1].h, 1.0 / k);
    EXPECT_DOUBLE_EQ(res.spec.entries[0].s, 0);
    const auto gaps = validate(res.spec).gaps;
    for (std::size_t k = 0; k < gaps.size(); ++k) EXPECT_NEAR(gaps[k], static_cast<double>(k + 1), 1e-6);
}

TEST(Designers, SummableConstantWarns) {
    const auto res = design_summable(DecayRule::parse("constant:0.5"), 20);
    EXPECT_FALSE(res.summable_trend);
    EXPECT_FALSE(res.warnings.empty());
    EXPECT_NEAR(res.partial_sums.back(), 20 * crossing_slack(0.5), 1e-12);
}

TEST(Designers, SummableSingle) {
    const auto res = design_summable(DecayRule::parse("constant:0.1"), 1);
    ASSERT_EQ(res.spec.entries.size(), 1u);
    EXPECT_NEAR(res.partial_sums[0], 0.0100167112464705, 1e-12);
    EXPECT_THROW(design_summable(DecayRule::parse("constant:2"), 3), Error);
    EXPECT_THROW(DecayRule::parse("bogus"), Error);
}

TEST(Designers, FromE) {
    const double ln2 = std::log(2.0);
    const std::vector<double> one{ln2};
    const auto d1 = design_from_E(IntervalSet::points(one, 1e-9), 6, 1.0);
    for (const auto& e : d1.spec.entries) EXPECT_NEAR(e.h, kPi / 4, 1e-12);
    EXPECT_TRUE(validate(d1.spec).ok);

    const std::vector<double> two{ln2, 2 * ln2};
    const auto d2 = design_from_E(IntervalSet::points(two, 1e-9), 6, 1.0);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(d2.spec.entries[k].h, k % 2 ? kPi / 3 : kPi / 4, 1e-12);
    for (std::size_t k = 0; k < 6; ++k)
        EXPECT_NEAR(crossing_slack(d2.spec.entries[k].h), d2.scheduled_slacks[k], 1e-9);

    EXPECT_LT(height_for_slack(1e-8), 1e-3);
    const std::vector<double> bad{0.0, 1.0};
    EXPECT_THROW(design_from_E(IntervalSet::points(bad, 1e-9), 4, 1.0), Error);
}

TEST(Designers, FromIntervalRecursAndValidates) {
    const IntervalSet e({{0.5, 1.0}}, 1e-6);
    const auto d = design_from_E(e, 30, 1.0);
    EXPECT_TRUE(validate(d.spec).ok);
    // every value in the dense subset that got scheduled once appears again later
    EXPECT_EQ(d.scheduled_slacks[0], 0.75);
    int repeats = 0;
    for (std::size_t k = 1; k < d.scheduled_slacks.size(); ++k) repeats += d.scheduled_slacks[k] == 0.75;
    EXPECT_GE(repeats, 3);
    for (double v : d.scheduled_slacks) EXPECT_TRUE(e.contains(v));
}
