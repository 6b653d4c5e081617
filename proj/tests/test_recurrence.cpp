#include <gtest/gtest.h>

#include <random>

#include "loomlab/recurrence.hpp"

using namespace loomlab;

namespace {

IntervalSet pts(std::vector<double> v, double delta = 1e-9) { return IntervalSet::points(v, delta); }

// pairwise interval sums, sorted and merged by hand
IntervalSet brute_sum(const IntervalSet& a, const IntervalSet& b) {
    std::vector<Interval> all;
    for (const auto& x : a.intervals())
        for (const auto& y : b.intervals()) all.push_back({x.lo + y.lo, x.hi + y.hi});
    std::sort(all.begin(), all.end(), [](const Interval& p, const Interval& q) { return p.lo < q.lo; });
    std::vector<Interval> merged;
    for (const auto& iv : all) {
        if (!merged.empty() && iv.lo <= merged.back().hi) merged.back().hi = std::max(merged.back().hi, iv.hi);
        else merged.push_back(iv);
    }
    return IntervalSet(merged, a.delta() + b.delta());
}

// box count by scanning grid cells one at a time
double brute_boxes(const IntervalSet& s, double r) {
    double count = 0;
    const long lo = static_cast<long>(std::floor(s.min() / r)) - 1, hi = static_cast<long>(std::ceil(s.max() / r)) + 1;
    for (long k = lo; k <= hi; ++k) {
        const double a = k * r, b = (k + 1) * r;
        bool hit = false;
        for (const auto& iv : s.intervals())
            if (iv.hi >= a + 1e-9 * r && iv.lo < b - 1e-9 * r) hit = true;
        // degenerate intervals count in the cell holding them
        for (const auto& iv : s.intervals())
            if (iv.lo == iv.hi && iv.lo >= a && iv.lo < b) hit = true;
        count += hit;
    }
    return count;
}

} // namespace

TEST(Sumset, SmallExamples) {
    EXPECT_TRUE(approx_equal(sumset(pts({1}), 3), pts({3}), 0));
    EXPECT_TRUE(approx_equal(sumset(pts({1, 2}), 2), pts({2, 3, 4}), 0));
    EXPECT_THROW(sumset(pts({1}), 0), Error);
    EXPECT_NEAR(sumset(pts({1}, 0.01), 4).delta(), 0.04, 1e-15);
}

TEST(Sumset, CantorPlusCantorCoversInterval) {
    const IntervalSet e = cantor_cover(8).shifted(1);
    const IntervalSet two = sumset(e, 2);
    EXPECT_TRUE(approx_equal(two, brute_sum(e, e), 1e-12));
    EXPECT_NEAR(two.min(), 2, 1e-12);
    EXPECT_NEAR(two.max(), 4, 1e-12);
    // C + C = [0, 2] already at cover level
    EXPECT_NEAR(two.measure(), 2, 1e-9);
    EXPECT_EQ(two.size(), 1u);
}

TEST(Sumset, MatchesBruteForceAndIsAssociative) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 5), w(0, 0.05);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Interval> ivs;
        for (int i = 0; i < 6; ++i) {
            const double a = u(rng);
            ivs.push_back({a, a + w(rng)});
        }
        const IntervalSet e(ivs, 1e-6);
        const IntervalSet two = sumset(e, 2), three = sumset(e, 3);
        ASSERT_TRUE(approx_equal(two, brute_sum(e, e), 1e-12));
        ASSERT_TRUE(approx_equal(three, brute_sum(two, e), 1e-12));
        ASSERT_TRUE(approx_equal(sumset(e, 5), minkowski_sum(two, three), 1e-12));
        ASSERT_EQ(three.min(), 3 * e.min());
        ASSERT_NEAR(three.max(), 3 * e.max(), 1e-12);
    }
}

TEST(DeltaSets, ArithmeticProgressions) {
    const double ln2 = std::log(2.0);
    const IntervalSet even = delta_sets(pts({ln2}), 5, Parity::even);
    EXPECT_TRUE(approx_equal(even, pts({2 * ln2, 4 * ln2, 6 * ln2}), 1e-12));
    EXPECT_TRUE(approx_equal(delta_sets(pts({1}), 10, Parity::odd), pts({1, 3, 5, 7, 9}), 0));
    const IntervalSet all = delta_sets(pts({1}), 10, Parity::even).united(delta_sets(pts({1}), 10, Parity::odd));
    EXPECT_TRUE(approx_equal(all, pts({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), 0));
    EXPECT_THROW(delta_sets(pts({0, 1}), 5, Parity::even), Error);
    const IntervalSet band({{0.5, 0.6}}, 1e-6);
    const IntervalSet d0 = delta_sets(band, 3, Parity::even);
    EXPECT_TRUE(approx_equal(d0, IntervalSet({{1.0, 1.2}, {2.0, 2.4}, {3.0, 3.0}}, 1e-6), 1e-12));
}

TEST(BoxDimension, Examples) {
    const auto scales = geometric_scales(2, 3, 12);
    EXPECT_NEAR(box_dimension(IntervalSet({{0, 1}}, 1e-9), scales).value, 1, 0.02);
    EXPECT_NEAR(box_dimension(pts({0.1, 0.37, 0.5, 0.81}), scales).value, 0, 0.05);
    const IntervalSet c = cantor_cover(12);
    const auto est = box_dimension(c, geometric_scales(3, 4, 10));
    EXPECT_NEAR(est.value, std::log(2.0) / std::log(3.0), 0.03);
    EXPECT_GT(est.r2, 0.99);
    for (std::size_t i = 0; i < est.scales.size(); ++i) EXPECT_EQ(est.counts[i], brute_boxes(c, est.scales[i]));
    EXPECT_THROW(box_dimension(c, geometric_scales(3, 4, 20)), Error);
    EXPECT_THROW(box_dimension(c, geometric_scales(3, 4, 5)), Error);
}

TEST(BoxDimension, DigitSumsetsMonotoneInM) {
    const std::vector<int> digits{0, 1};
    const IntervalSet e = digit_cantor_cover(10, digits, 5);
    const auto scales = geometric_scales(10, 1, 4);
    double prev = 0;
    for (int m = 1; m <= 4; ++m) {
        const auto est = box_dimension(sumset(e, m), scales);
        EXPECT_GE(est.value, prev - 1e-9);
        EXPECT_NEAR(est.value, digit_sumset_dimension(10, digits, m), 0.05) << "m=" << m;
        prev = est.value;
    }
}

TEST(Recurrence, Witnesses) {
    const double ln2 = std::log(2.0);
    const std::vector<double> e{ln2};
    const auto design = design_from_E(IntervalSet::points(e, 1e-9), 10, 1.0);
    const LoomSurface surf(design.spec);

    const auto zero = recurrence_by_slack(0, surf, 0.05);
    EXPECT_TRUE(zero.found);
    EXPECT_TRUE(zero.witness.pattern.empty());

    const auto two = recurrence_by_slack(2 * ln2, surf, 0.05);
    ASSERT_TRUE(two.found);
    EXPECT_EQ(two.witness.pattern.size(), 2u);
    EXPECT_NEAR(two.witness.traced_slack, 2 * ln2, 0.05);
    EXPECT_LE(two.witness.base_distance, 0.05);
    EXPECT_GT(two.witness.min_gap, 10);

    const auto four = recurrence_by_slack(4 * ln2, surf, 0.05);
    ASSERT_TRUE(four.found);
    EXPECT_EQ(four.witness.pattern.size(), 4u);
    EXPECT_NEAR(four.witness.traced_slack, 4 * ln2, 0.05);

    EXPECT_FALSE(recurrence_by_slack(ln2, surf, 0.1).found);
    EXPECT_FALSE(recurrence_by_slack(3 * ln2, surf, 0.1).found);
    EXPECT_THROW(recurrence_by_slack(-1, surf, 0.1), Error);
}
