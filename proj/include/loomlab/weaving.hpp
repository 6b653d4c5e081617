#pragma once

// Crossings, weaving geodesics and the empirical checks built on them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "loomlab/crossing.hpp"
#include "loomlab/error.hpp"
#include "loomlab/interval_set.hpp"
#include "loomlab/parallel.hpp"
#include "loomlab/surface.hpp"
#include "loomlab/tracer.hpp"

namespace loomlab {

enum class Sign { plus, minus };

inline int start_sheet(Sign s) { return s == Sign::plus ? 0 : 1; }

struct WeavingPattern {
    std::vector<int> indices;
    Sign initial_sign = Sign::plus;
};

inline void check_pattern(const WeavingPattern& w, const LoomSurface& surf) {
    for (std::size_t i = 0; i < w.indices.size(); ++i) {
        const int k = w.indices[i];
        if (k < 1 || k > surf.size()) fail(ErrorCode::domain, "pattern index " + std::to_string(k) + " outside the prefix");
        if (i > 0 && !(k > w.indices[i - 1])) fail(ErrorCode::precondition, "weaving pattern must be strictly increasing");
    }
}

struct CrossingGeodesic {
    int index = 0;
    Sign sign = Sign::plus;
    GeodesicLine line; // developed: from the backward end of A x_0 to R_k(forward end)
    double slack_closed_form = 0;
};

inline CrossingGeodesic build_crossing(int k, Sign sign, const LoomSurface& surf) {
    if (k < 1 || k > surf.size()) fail(ErrorCode::domain, "crossing index outside the prefix");
    const ChartCircle c = surf.circle(k);
    return {k, sign, {BoundaryPoint::at(0), BoundaryPoint::at(c.center)}, crossing_slack(surf.entry(k).h)};
}

/// Developed geodesic of a reflection word, with the folded line after
/// each crossing computed directly from the word.
struct DevelopedWord {
    std::vector<int> word;
    int sheet = 0;
    GeodesicLine line;
    LineSchedule schedule;
};

/// Line from b0 to R_{w1} ... R_{wm}(inf). After the j-th crossing the folded
/// line runs from R_{wj}...R_{w1}(b0) to R_{w(j+1)}...R_{wm}(inf).
inline DevelopedWord develop_word(const std::vector<int>& word, int sheet, const LoomSurface& surf,
                                  BoundaryPoint b0 = BoundaryPoint::at(0)) {
    for (int k : word)
        if (k < 1 || k > surf.size()) fail(ErrorCode::domain, "word index outside the prefix");
    const std::size_t m = word.size();
    std::vector<BoundaryPoint> fwd(m + 1);
    fwd[m] = BoundaryPoint::infinity();
    for (std::size_t j = m; j-- > 0;) fwd[j] = surf.reflection(word[j]).apply(fwd[j + 1]);
    DevelopedWord out{word, sheet, {b0, fwd[0]}, {}};
    out.schedule.initial = out.line;
    BoundaryPoint back = b0;
    for (std::size_t j = 0; j < m; ++j) {
        back = surf.reflection(word[j]).apply(back);
        out.schedule.after_crossing.push_back({back, fwd[j + 1]});
    }
    return out;
}

/// Trajectory of a developed word from band real part tau0 for `horizon`.
inline Trajectory trace_word(const DevelopedWord& dw, double tau0, double horizon, const LoomSurface& surf) {
    TraceOptions opts;
    opts.schedule = &dw.schedule;
    return trace_geodesic(tangent_on_line(dw.line, tau0, dw.sheet), horizon, surf, opts);
}

struct WeavingTrace {
    WeavingPattern pattern;
    DevelopedWord developed;
    double tau0 = 0;
    double horizon = 0;
    double predicted_slack = 0;
    Trajectory traj;
};

/// Start a margin below every crossing and stop symmetrically above the last one.
inline WeavingTrace build_weaving(const WeavingPattern& w, const LoomSurface& surf, double margin = 20) {
    check_pattern(w, surf);
    WeavingTrace out;
    out.pattern = w;
    out.developed = develop_word(w.indices, start_sheet(w.initial_sign), surf);
    for (int k : w.indices) out.predicted_slack += crossing_slack(surf.entry(k).h);
    const double first = w.indices.empty() ? 0 : surf.entry(w.indices.front()).s;
    const double last = w.indices.empty() ? 0 : surf.entry(w.indices.back()).s;
    out.tau0 = std::min(0.0, first) - margin;
    out.horizon = 2 * (std::max(last, 0.0) - out.tau0) + out.predicted_slack;
    out.traj = trace_word(out.developed, out.tau0, out.horizon, surf);
    return out;
}

inline WeavingTrace trace_crossing(int k, Sign sign, const LoomSurface& surf) {
    return build_weaving({{k}, sign}, surf);
}

// ---------------------------------------------------------------------------
// Slack additivity

struct AdditivityReport {
    std::vector<int> pattern;
    double traced_slack = 0;
    double predicted_slack = 0;
    double abs_error = 0;
    double min_gap = std::numeric_limits<double>::infinity(); // min |s_{k_j} - s_{k_{j+1}}|
    double horizon = 0;
    std::vector<int> crossing_sequence;
};

inline AdditivityReport verify_weaving_additivity(const WeavingPattern& w, const LoomSurface& surf) {
    const WeavingTrace wt = build_weaving(w, surf);
    AdditivityReport rep;
    rep.pattern = w.indices;
    rep.traced_slack = slack(wt.traj).value;
    rep.predicted_slack = wt.predicted_slack;
    rep.abs_error = std::abs(rep.traced_slack - rep.predicted_slack);
    rep.horizon = wt.horizon;
    rep.crossing_sequence = crossing_sequence(wt.traj);
    for (std::size_t j = 1; j < w.indices.size(); ++j)
        rep.min_gap = std::min(rep.min_gap, std::abs(surf.entry(w.indices[j]).s - surf.entry(w.indices[j - 1]).s));
    return rep;
}

struct GapSweep {
    std::vector<double> gaps;
    std::vector<AdditivityReport> reports;
    bool error_non_increasing = true;
};

/// Equally spaced surfaces s_j = (j-1) * gap with constant height h.
inline GapSweep sweep_weaving_gaps(const WeavingPattern& w, double h, std::vector<double> gaps) {
    std::sort(gaps.begin(), gaps.end());
    int count = 0;
    for (int k : w.indices) count = std::max(count, k);
    GapSweep out;
    out.gaps = gaps;
    out.reports.resize(gaps.size());
    parallel_for(gaps.size(), [&](std::size_t i) {
        LoomSurfaceSpec spec;
        for (int j = 0; j < count; ++j) spec.entries.push_back({j * gaps[i], h});
        out.reports[i] = verify_weaving_additivity(w, LoomSurface(spec));
    });
    for (std::size_t i = 1; i < gaps.size(); ++i)
        if (out.reports[i].abs_error > out.reports[i - 1].abs_error) out.error_non_increasing = false;
    return out;
}

// ---------------------------------------------------------------------------
// Weaving lemma sampling

struct LemmaSample {
    std::string source; // "word" or "tangent"
    std::vector<int> word;
    double start_tau = 0;
    double slack = 0;
    std::vector<int> sequence;
    bool weaving = true;
};

struct BacktrackDemo {
    std::vector<int> sequence;
    double slack = 0;
    double min_gap = 0;
    bool demonstrates = false;
};

struct WeavingLemmaReport {
    double rho = 0;
    int k0 = 0;               // least index with every gap from k0 - 1 onward > rho
    double sufficient_S = 0;  // s_{k0}
    double empirical_S = 0;   // least sampled start beyond which all low-slack samples weave
    double min_gap = 0;       // min boundary gap over the prefix
    int accepted = 0;         // samples with slack <= rho
    int accepted_beyond_S = 0;
    int weaving_beyond_S = 0;
    int attempts = 0;
    bool all_weaving_beyond_S = true;
    std::vector<LemmaSample> samples;
    BacktrackDemo demo;
};

/// Ray from near (s_2 + 1, 0) toward R_2 R_1(inf): crosses dD_2 and then dD_1.
inline BacktrackDemo backtracking_demo(const LoomSurface& surf) {
    if (surf.size() < 2) fail(ErrorCode::precondition, "backtracking demo needs two half-planes");
    const double tau0 = surf.entry(2).s + 1;
    const BoundaryPoint target = surf.reflection(2).apply(surf.reflection(1).apply(BoundaryPoint::infinity()));
    const Complex w{0, std::exp(tau0)};
    // the geodesic through w ending at target: its circle is centered where |w-c| = |target-c|
    const double c = (std::norm(w) - target.x * target.x) / (2 * (w.real() - target.x));
    const BoundaryPoint b0 = BoundaryPoint::at(2 * c - target.x);
    DevelopedWord dw = develop_word({2, 1}, 0, surf, b0);
    const double horizon = 2 * (tau0 - surf.entry(1).s) + 40;
    const Trajectory tr = trace_word(dw, tau0, horizon, surf);
    BacktrackDemo out;
    out.sequence = crossing_sequence(tr);
    out.slack = slack(tr).value;
    out.min_gap = surf.report().min_boundary_distance;
    out.demonstrates = out.sequence == std::vector<int>{2, 1} && out.slack > out.min_gap;
    return out;
}

inline WeavingLemmaReport verify_weaving_lemma(double rho, const LoomSurface& surf, int samples,
                                               unsigned long long seed = 1) {
    if (!(rho >= 0)) fail(ErrorCode::domain, "rho must be non-negative");
    if (samples < 1) fail(ErrorCode::domain, "need at least one sample");
    WeavingLemmaReport rep;
    rep.rho = rho;
    const int n = surf.size();
    const auto& gaps = surf.report().gaps;
    rep.min_gap = surf.report().min_boundary_distance;
    // k0: least k with d(dD_{i-1}, dD_i) > rho for every i >= k; gaps[j-1] joins D_j and D_{j+1}
    rep.k0 = 1;
    for (int j = static_cast<int>(gaps.size()); j >= 1; --j) {
        if (!(gaps[j - 1] > rho)) {
            rep.k0 = j + 2;
            break;
        }
    }
    if (rep.k0 > n) rep.k0 = n;
    rep.sufficient_S = surf.entry(rep.k0).s;
    const double lo_tau = surf.entry(1).s - 5;
    const double hi_tau = surf.entry(n).s + 2;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0, 1);
    struct Candidate {
        bool from_word;
        std::vector<int> word;
        BoundaryPoint b0;
        int sheet;
        double start_tau;
        SurfaceTangent tangent;
    };
    auto make_candidate = [&] {
        Candidate c;
        c.start_tau = lo_tau + (hi_tau - lo_tau) * unit(rng);
        c.sheet = unit(rng) < 0.5 ? 0 : 1;
        c.from_word = unit(rng) < 0.8;
        if (c.from_word) {
            const int len = 1 + static_cast<int>(unit(rng) * std::min(3, n));
            for (int i = 0; i < len; ++i) c.word.push_back(1 + static_cast<int>(unit(rng) * n));
            if (unit(rng) < 0.5) std::sort(c.word.begin(), c.word.end());
            c.word.erase(std::unique(c.word.begin(), c.word.end()), c.word.end());
            const double mag = std::exp(lo_tau - 25 - 10 * unit(rng));
            c.b0 = unit(rng) < 0.3 ? BoundaryPoint::at(0) : BoundaryPoint::at(unit(rng) < 0.5 ? mag : -mag);
        } else {
            c.tangent = {{{c.start_tau, 0.1 * (unit(rng) - 0.5)}, c.sheet}, 0.1 * (unit(rng) - 0.5)};
        }
        return c;
    };
    auto evaluate = [&](const Candidate& c, LemmaSample& out) -> bool {
        out.source = c.from_word ? "word" : "tangent";
        out.word = c.word;
        out.start_tau = c.start_tau;
        if (c.from_word) {
            const DevelopedWord dw = develop_word(c.word, c.sheet, surf, c.b0);
            const double tau_low = std::min(lo_tau, c.start_tau) - 20;
            const double horizon = 2 * (hi_tau + 20 - tau_low) + rho;
            Trajectory tr;
            try {
                tr = trace_word(dw, tau_low, horizon, surf);
            } catch (const Error&) {
                return false;
            }
            // first time the folded path reaches band real part start_tau
            double t_star = -1;
            const double step = 0.25;
            for (double t = 0; t <= tr.total_time; t += step) {
                if (tr.tau(t) >= c.start_tau) {
                    double a = std::max(0.0, t - step), b = t;
                    for (int i = 0; i < 60; ++i) {
                        const double mid = 0.5 * (a + b);
                        (tr.tau(mid) >= c.start_tau ? b : a) = mid;
                    }
                    t_star = b;
                    break;
                }
            }
            if (t_star < 0) return false;
            out.slack = slack_between(tr, t_star, tr.total_time);
            for (const auto& ev : tr.crossings)
                if (ev.time > t_star) out.sequence.push_back(ev.index);
        } else {
            if (!surf.in_closure(c.tangent.base.z)) return false;
            const double horizon = 2 * (hi_tau + 20 - c.start_tau) + rho;
            const Trajectory tr = trace_geodesic(c.tangent, horizon, surf);
            out.slack = slack(tr).value;
            out.sequence = crossing_sequence(tr);
        }
        out.weaving = strictly_increasing(out.sequence);
        return true;
    };

    const std::size_t batch = 64;
    const int max_attempts = 200 * samples;
    while (rep.accepted_beyond_S < samples && rep.attempts < max_attempts) {
        std::vector<Candidate> cands;
        for (std::size_t i = 0; i < batch; ++i) cands.push_back(make_candidate());
        std::vector<LemmaSample> results(batch);
        std::vector<char> ok(batch, 0);
        parallel_for(batch, [&](std::size_t i) { ok[i] = evaluate(cands[i], results[i]); });
        for (std::size_t i = 0; i < batch && rep.accepted_beyond_S < samples; ++i) {
            ++rep.attempts;
            if (!ok[i] || !(results[i].slack <= rho)) continue;
            ++rep.accepted;
            if (results[i].start_tau > rep.sufficient_S) {
                ++rep.accepted_beyond_S;
                rep.weaving_beyond_S += results[i].weaving;
            }
            rep.samples.push_back(std::move(results[i]));
        }
    }
    rep.all_weaving_beyond_S = rep.weaving_beyond_S == rep.accepted_beyond_S;
    // empirical S: just past the last non-weaving low-slack sample
    double last_bad = -std::numeric_limits<double>::infinity();
    double first = std::numeric_limits<double>::infinity();
    for (const auto& s : rep.samples) {
        first = std::min(first, s.start_tau);
        if (!s.weaving) last_bad = std::max(last_bad, s.start_tau);
    }
    rep.empirical_S = std::isfinite(last_bad) ? last_bad : first;
    if (n >= 2) rep.demo = backtracking_demo(surf);
    return rep;
}

// ---------------------------------------------------------------------------
// Slack of eps-chains

struct ChainArc {
    SurfaceTangent start;
    double length = 0;
};

struct ChainSlackReport {
    int arcs = 0;
    double sum_arc_slack = 0;
    double tight_slack = 0;
    double abs_error = 0;
    double jump_sum = 0;               // sum of T^1 jump proxies at the junctions
    double max_junction_deviation = 0; // distance of developed junctions from the tight geodesic
    double min_arc_length = 0;
};

namespace detail {

/// Image of a frame under an isometry (reversing ones included).
inline Mat2 push_frame(const Isometry& g, const Mat2& f) {
    return (g.reversing ? g.m * sigma_conjugate(f) : g.m * f).normalized();
}

/// T^1 jump proxy: max of base distance and distance after unit geodesic time.
inline double frame_jump(const Mat2& a, const Mat2& b) {
    const double d0 = dist_chart(frame_point(a), frame_point(b));
    const double d1 = dist_chart(frame_point(a * geodesic_flow(1)), frame_point(b * geodesic_flow(1)));
    return std::max(d0, d1);
}

inline int nearest_boundary(Complex w, const LoomSurface& surf) {
    int best = 1;
    double bd = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= surf.size(); ++k) {
        const ChartCircle& c = surf.circle(k);
        const double d = dist_point_circle(w, c.center, c.radius);
        if (d < bd) {
            bd = d;
            best = k;
        }
    }
    return best;
}

/// Jump between the end of one arc and the start of the next, both as
/// unscaled frames. Across sheets the second frame is pushed through the
/// nearest boundary reflection first; that reflection is returned too.
inline std::pair<double, Isometry> junction(const Mat2& end, int end_sheet, const Mat2& next, int next_sheet,
                                            const LoomSurface& surf) {
    if (end_sheet == next_sheet) return {frame_jump(end, next), Isometry::identity()};
    const Isometry r = surf.reflection(nearest_boundary(frame_point(end), surf));
    return {frame_jump(end, push_frame(r, next)), r};
}

} // namespace detail

/// Compares the pulled-tight geodesic of a chain with the sum of its arc
/// slacks. Works in the unscaled chart, so keep the surface within moderate s.
inline ChainSlackReport verify_chain_slack(const std::vector<ChainArc>& chain, double eps, double c,
                                           const LoomSurface& surf) {
    if (chain.empty()) fail(ErrorCode::precondition, "empty chain");
    if (!(eps > 0) || !(c > 0)) fail(ErrorCode::domain, "eps and c must be positive");
    ChainSlackReport rep;
    rep.arcs = static_cast<int>(chain.size());
    rep.min_arc_length = std::numeric_limits<double>::infinity();
    for (const auto& a : chain) rep.min_arc_length = std::min(rep.min_arc_length, a.length);
    if (rep.min_arc_length < c) fail(ErrorCode::precondition, "chain arc shorter than c");

    std::vector<Trajectory> trajs(chain.size());
    parallel_for(chain.size(), [&](std::size_t i) { trajs[i] = trace_geodesic(chain[i].start, chain[i].length, surf); });

    // G maps the chart of the current arc's start into the common developed chart
    Isometry g = Isometry::identity();
    std::vector<Complex> junction_points;
    const Complex p = band_to_complex(chain.front().start.base.z);
    Complex q;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const Trajectory& tr = trajs[i];
        rep.sum_arc_slack += slack(tr).value;
        const Isometry unfold = fold_isometry(tr, tr.crossings.size(), surf).inverse();
        const Mat2 end_frame = tr.frame(tr.total_time).at_scale(0);
        const Isometry to_common = g * unfold;
        q = to_common.apply(frame_point(end_frame));
        if (i + 1 == chain.size()) break;
        junction_points.push_back(q);
        const Mat2 next = frame_of(chain[i + 1].start).at_scale(0);
        const auto [jump, r] = detail::junction(end_frame, tr.end_sheet(), next, chain[i + 1].start.base.sheet, surf);
        rep.jump_sum += jump;
        g = to_common * r;
        junction_points.push_back(g.apply(frame_point(next)));
    }
    if (!(rep.jump_sum < eps)) fail(ErrorCode::precondition, "chain jumps exceed eps");
    const double dtau = trajs.back().tau(trajs.back().total_time) - chain.front().start.base.z.x;
    const double scale = std::sqrt(std::abs(p) * std::abs(q));
    rep.tight_slack = dist_chart(p / scale, q / scale) - dtau;
    rep.abs_error = std::abs(rep.sum_arc_slack - rep.tight_slack);
    if (!junction_points.empty()) {
        const GeodesicLine tight = geodesic_through(p / scale, q / scale);
        for (Complex w : junction_points)
            rep.max_junction_deviation = std::max(rep.max_junction_deviation, dist_point_geodesic(w / scale, tight));
    }
    return rep;
}

/// Cuts a traced geodesic half a unit after each crossing and nudges every
/// new arc start along the band real direction, scaled so the jump proxies
/// add up to about 0.9 eps.
inline std::vector<ChainArc> crossing_chain(const Trajectory& g, double eps, const LoomSurface& surf) {
    if (g.kind != TraceKind::geodesic) fail(ErrorCode::precondition, "chain needs a geodesic");
    std::vector<double> cuts{0};
    for (const auto& ev : g.crossings)
        if (ev.time + 0.5 < g.total_time - 0.5 && ev.time + 0.5 > cuts.back() + 0.5) cuts.push_back(ev.time + 0.5);
    cuts.push_back(g.total_time);
    const auto build = [&](double delta) {
        std::vector<ChainArc> out;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            SurfaceTangent y = g.tangent(cuts[i]);
            if (i > 0) {
                SurfaceTangent moved = y;
                moved.base.z.x += delta;
                if (!surf.in_closure(moved.base.z)) moved.base.z.x -= 2 * delta;
                y = moved;
            }
            out.push_back({y, cuts[i + 1] - cuts[i]});
        }
        return out;
    };
    const auto proxy_sum = [&](const std::vector<ChainArc>& ch) {
        double sum = 0;
        for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
            const Trajectory tr = trace_geodesic(ch[i].start, ch[i].length, surf);
            const Mat2 end = tr.frame(tr.total_time).at_scale(0);
            sum += detail::junction(end, tr.end_sheet(), frame_of(ch[i + 1].start).at_scale(0),
                                    ch[i + 1].start.base.sheet, surf).first;
        }
        return sum;
    };
    if (cuts.size() < 3) return build(0);
    double delta = 1e-3;
    for (int it = 0; it < 3; ++it) {
        const double sum = proxy_sum(build(delta));
        if (!(sum > 0)) break;
        delta *= 0.9 * eps / sum;
    }
    return build(delta);
}

struct ChainSweep {
    std::vector<double> eps;
    std::vector<ChainSlackReport> reports;
    double slope = 0; // log-log slope of abs_error against eps
};

inline ChainSweep sweep_chain_slack(const Trajectory& g, const std::vector<double>& eps_values, double c,
                                    const LoomSurface& surf) {
    ChainSweep out;
    out.eps = eps_values;
    out.reports.resize(eps_values.size());
    parallel_for(eps_values.size(), [&](std::size_t i) {
        out.reports[i] = verify_chain_slack(crossing_chain(g, eps_values[i], surf), eps_values[i], c, surf);
    });
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < eps_values.size(); ++i) {
        if (out.reports[i].abs_error > 0) {
            xs.push_back(std::log(eps_values[i]));
            ys.push_back(std::log(out.reports[i].abs_error));
        }
    }
    if (xs.size() >= 2) out.slope = least_squares(xs, ys).slope;
    return out;
}

} // namespace loomlab
