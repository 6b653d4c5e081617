#include <gtest/gtest.h>

#include "loomlab/weaving.hpp"
#include "oracles.hpp"

using namespace loomlab;

namespace {

LoomSurface make_surface(std::initializer_list<HalfPlaneSpec> entries) {
    LoomSurfaceSpec spec;
    spec.entries = entries;
    return LoomSurface(spec);
}

} // namespace

TEST(Crossing, TracedSlackMatchesClosedForm) {
    for (int i = 1; i <= 14; ++i) {
        const double h = 0.1 * i;
        const LoomSurface surf = make_surface({{0, h}});
        for (Sign sg : {Sign::plus, Sign::minus}) {
            const auto w = trace_crossing(1, sg, surf);
            ASSERT_EQ(crossing_sequence(w.traj), std::vector<int>{1});
            EXPECT_NEAR(slack(w.traj).value, crossing_slack(h), 1e-6) << "h=" << h;
            EXPECT_EQ(w.traj.end_sheet(), 1 - start_sheet(sg));
        }
    }
}

TEST(Crossing, DevelopedLinePassesThroughTopOfHalfPlane) {
    const LoomSurface surf = make_surface({{0, 0.3}, {9, 0.8}, {30, 1.2}});
    for (int k = 1; k <= 3; ++k) {
        const auto cg = build_crossing(k, Sign::plus, surf);
        const auto& e = surf.entry(k);
        // check in a chart scaled by exp(-s_k) to keep numbers O(1)
        const GeodesicLine scaled{detail::scale_point(cg.line.e_minus, e.s), detail::scale_point(cg.line.e_plus, e.s)};
        EXPECT_NEAR(dist_point_geodesic(band_to_complex({0, e.h}), scaled), 0, 1e-8);
        EXPECT_NEAR(cg.slack_closed_form, crossing_slack(e.h), 0);
    }
    EXPECT_THROW(build_crossing(4, Sign::plus, surf), Error);
    EXPECT_THROW(build_crossing(0, Sign::plus, surf), Error);
}

TEST(Weaving, LongGapAdditivity) {
    const LoomSurface surf = make_surface({{0, kPi / 4}, {100, kPi / 4}});
    const auto rep = verify_weaving_additivity({{1, 2}, Sign::plus}, surf);
    EXPECT_EQ(rep.crossing_sequence, (std::vector<int>{1, 2}));
    EXPECT_NEAR(rep.traced_slack, 2 * std::log(2.0), 1e-6);
    EXPECT_NEAR(rep.min_gap, 100, 0);
}

TEST(Weaving, ParityOfEndSheet) {
    const LoomSurface surf = make_surface({{0, 0.5}, {20, 0.6}, {50, 0.7}});
    const std::vector<std::vector<int>> patterns{{1}, {1, 2}, {1, 2, 3}, {2, 3}, {1, 3}};
    for (const auto& p : patterns) {
        for (Sign sg : {Sign::plus, Sign::minus}) {
            const auto w = build_weaving({p, sg}, surf);
            EXPECT_EQ(crossing_sequence(w.traj), p);
            EXPECT_EQ(w.traj.end_sheet(), (start_sheet(sg) + static_cast<int>(p.size())) % 2);
        }
    }
    EXPECT_THROW(build_weaving({{2, 1}, Sign::plus}, surf), Error);
    EXPECT_THROW(build_weaving({{1, 4}, Sign::plus}, surf), Error);
}

TEST(Weaving, ErrorShrinksWithGap) {
    const auto sweep = sweep_weaving_gaps({{1, 2, 3}, Sign::plus}, 0.7, {5, 10, 20, 40});
    EXPECT_TRUE(sweep.error_non_increasing);
    EXPECT_LT(sweep.reports.back().abs_error, 1e-3);
    EXPECT_GT(sweep.reports.front().abs_error, sweep.reports.back().abs_error);
}

TEST(Weaving, LemmaSampling) {
    const LoomSurface surf = make_surface({{0, 0.6}, {3, 0.6}, {15, 0.6}, {40, 0.6}});
    const auto rep = verify_weaving_lemma(5.0, surf, 60, 7);
    EXPECT_EQ(rep.k0, 3); // d(dD_1, dD_2) is below rho
    EXPECT_NEAR(rep.sufficient_S, 15, 0);
    EXPECT_GE(rep.accepted_beyond_S, 60);
    EXPECT_TRUE(rep.all_weaving_beyond_S);
    EXPECT_LE(rep.empirical_S, rep.sufficient_S + 1e-9);
    EXPECT_EQ(rep.demo.sequence, (std::vector<int>{2, 1}));
    EXPECT_GT(rep.demo.slack, rep.demo.min_gap);
}

TEST(Chain, SlackErrorIsFirstOrderInEps) {
    const LoomSurface surf = make_surface({{0, 0.5}, {8, 0.7}, {20, 0.6}});
    const auto w = build_weaving({{1, 2, 3}, Sign::plus}, surf);
    const double t0 = w.traj.crossings.front().time - 3, t1 = w.traj.crossings.back().time + 3;
    const Trajectory g = trace_geodesic(w.traj.tangent(t0), t1 - t0, surf);
    ASSERT_EQ(crossing_sequence(g), (std::vector<int>{1, 2, 3}));
    const auto sweep = sweep_chain_slack(g, {0.08, 0.04, 0.02, 0.01, 0.005}, 0.25, surf);
    for (const auto& r : sweep.reports) {
        EXPECT_LT(r.jump_sum, 0.08 + 1e-12);
        EXPECT_GT(r.abs_error, 0);
    }
    EXPECT_NEAR(sweep.slope, 1.0, 0.2);
    // zero displacement reproduces the traced slack
    const auto chain = crossing_chain(g, 1e-12, surf);
    const auto r0 = verify_chain_slack(chain, 1e-6, 0.25, surf);
    EXPECT_NEAR(r0.tight_slack, slack(g).value, 1e-6);
    EXPECT_NEAR(r0.sum_arc_slack, slack(g).value, 1e-6);
    EXPECT_LT(r0.max_junction_deviation, 1e-6);
    EXPECT_THROW(verify_chain_slack(chain, 1e-6, 1e6, surf), Error);
}
