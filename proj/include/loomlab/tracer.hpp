#pragma once

// Geodesic and horocycle tracing on a loom surface.
//
// The trajectory is folded back into the closure of J as a billiard path:
// when it meets a boundary dD_k it continues on the other sheet, which in the
// folded picture is the mirror image across dD_k. The developed path is the
// single chart curve obtained by undoing the mirrors (the reflection word).
//
// Frames are stored as (c, M): the true chart frame is diag(e^{c/2}, e^{-c/2}) * M,
// with c reset to the band real part at every arc start so M stays O(1).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "loomlab/error.hpp"
#include "loomlab/hyperbolic.hpp"
#include "loomlab/surface.hpp"

namespace loomlab {

struct SurfaceTangent {
    SurfacePoint base;
    double angle = 0; // band direction, radians
};

/// Chart frame e^c * M with M acting on the scaled chart.
struct ScaledFrame {
    double c = 0;
    Mat2 m;

    Complex scaled_point() const { return frame_point(m); }

    BandPoint band_point() const {
        const BandPoint p = complex_to_band(scaled_point());
        return {p.x + c, p.y};
    }

    double tau() const { return c + chart_tau(scaled_point()); }

    /// Same frame with c moved to the band real part of its point.
    ScaledFrame recentred() const {
        const double shift = chart_tau(scaled_point());
        const double k = std::exp(-shift / 2);
        Mat2 out{m.a * k, m.b * k, m.c / k, m.d / k};
        return {c + shift, out.normalized()};
    }

    /// Frame expressed at a different scale offset.
    Mat2 at_scale(double target) const {
        const double k = std::exp((c - target) / 2);
        return {m.a * k, m.b * k, m.c / k, m.d / k};
    }
};

inline double wrap_angle(double a) {
    a = std::fmod(a, 2 * kPi);
    if (a < 0) a += 2 * kPi;
    if (a >= 2 * kPi) a = 0;
    return a;
}

inline ScaledFrame frame_of(const SurfaceTangent& y) {
    if (!is_valid(y.base.z)) fail(ErrorCode::domain, "tangent base point outside the band");
    const Complex w = band_to_complex({0, y.base.z.y});
    return {y.base.z.x, frame_at(w, std::arg(w) + y.angle)};
}

inline SurfaceTangent tangent_of(const ScaledFrame& f, int sheet) {
    const Complex w = f.scaled_point();
    const BandPoint p = complex_to_band(w);
    return {{{p.x + f.c, p.y}, sheet}, wrap_angle(frame_angle(f.m) - std::arg(w))};
}

/// Rotation by pi about i: reverses the tangent direction.
inline constexpr Mat2 kFlip{0, 1, -1, 0};

enum class TraceKind { geodesic, horocycle };
enum class HoroDirection { stable, unstable };

struct Arc {
    ScaledFrame start; // traced frame at t0
    int eps = 1;       // horocycle parameter sign inside this arc
    int sheet = 0;
    double t0 = 0, t1 = 0;
    int crossing = 0; // boundary crossed at t1, or 0
};

struct CrossingEvent {
    double time = 0;
    int index = 0;
    int from_sheet = 0, to_sheet = 1;
};

struct Trajectory {
    TraceKind kind = TraceKind::geodesic;
    bool flipped = false; // reported tangents are traced frames times kFlip
    std::vector<Arc> arcs;
    std::vector<CrossingEvent> crossings;
    double total_time = 0; // elapsed length, always >= 0
    double signed_time = 0;
    int grazes = 0;

    const Arc& arc_at(double t) const {
        if (arcs.empty()) fail(ErrorCode::precondition, "empty trajectory");
        auto it = std::upper_bound(arcs.begin(), arcs.end(), t, [](double v, const Arc& a) { return v < a.t1; });
        if (it == arcs.end()) --it;
        return *it;
    }

    /// Traced frame at elapsed time t in [0, total_time].
    ScaledFrame traced_frame(double t) const {
        const Arc& a = arc_at(t);
        const double local = t - a.t0;
        const Mat2 step = kind == TraceKind::geodesic ? geodesic_flow(local) : stable_horocycle(a.eps * local);
        return {a.start.c, a.start.m * step};
    }

    ScaledFrame frame(double t) const {
        ScaledFrame f = traced_frame(t);
        if (flipped) f.m = f.m * kFlip;
        return f;
    }

    SurfaceTangent tangent(double t) const { return tangent_of(frame(t), arc_at(t).sheet); }
    SurfaceTangent start_tangent() const { return tangent(0); }
    SurfaceTangent end_tangent() const { return tangent(total_time); }
    double tau(double t) const { return traced_frame(t).tau(); }
    int sheet(double t) const { return arc_at(t).sheet; }
    int end_sheet() const { return arcs.back().sheet; }
};

/// Geodesic lines (unscaled chart) imposed after the first, second, ...
/// crossing. Used for developed geodesics whose endpoints are known exactly
/// but drift below double resolution when pushed through long reflection words.
struct LineSchedule {
    std::optional<GeodesicLine> initial; // imposed on the start frame of a forward trace
    std::vector<GeodesicLine> after_crossing;
};

struct TraceOptions {
    const LineSchedule* schedule = nullptr;
    int max_crossings = 1000000;
};

namespace detail {

inline BoundaryPoint scale_point(const BoundaryPoint& p, double c) {
    return p.infinite ? p : BoundaryPoint::at(p.x * std::exp(-c));
}

/// Frame on `line` (scaled at f.c) at the foot of the perpendicular from f's point.
inline Mat2 project_onto(const GeodesicLine& line, const ScaledFrame& f) {
    const GeodesicLine scaled{scale_point(line.e_minus, f.c), scale_point(line.e_plus, f.c)};
    const Mat2 p = line_frame(scaled);
    const Complex local = p.inverse().apply(f.scaled_point());
    return (p * geodesic_flow(std::log(std::abs(local)))).normalized();
}

inline void check_start(const LoomSurface& surf, const ScaledFrame& f) {
    if (surf.excised_scaled(f.scaled_point(), f.c) != 0)
        fail(ErrorCode::precondition, "start point lies inside an excised half-plane");
}

/// Throws if the geodesic of frame m (scaled at c) is a boundary geodesic.
inline void check_not_boundary(const LoomSurface& surf, const Mat2& m, double c) {
    const BoundaryPoint lo = m.apply(BoundaryPoint::at(0));
    const BoundaryPoint hi = m.apply(BoundaryPoint::infinity());
    if (lo.infinite || hi.infinite) return;
    for (int j = 1; j <= surf.size(); ++j) {
        const ChartCircle cj = surf.circle_scaled(j, c);
        const double tol = 1e-10 * cj.radius;
        const bool same = (std::abs(lo.x - cj.lo()) < tol && std::abs(hi.x - cj.hi()) < tol) ||
                          (std::abs(lo.x - cj.hi()) < tol && std::abs(hi.x - cj.lo()) < tol);
        if (same) fail(ErrorCode::degenerate_trace, "tangent runs along boundary geodesic " + std::to_string(j));
    }
}

/// Forward geodesic crossing: (time, index) or (inf, 0).
inline std::pair<double, int> next_geodesic_crossing(const LoomSurface& surf, const ScaledFrame& f, int last) {
    const double inf = std::numeric_limits<double>::infinity();
    const BoundaryPoint fwd = f.m.apply(BoundaryPoint::infinity());
    if (fwd.infinite || !(fwd.x < 0)) return {inf, 0};
    const int k = surf.footprint_at_log(std::log(-fwd.x) + f.c);
    if (k == 0) return {inf, 0};
    const ChartCircle ck = surf.circle_scaled(k, f.c);
    const Mat2 inv = f.m.inverse();
    const BoundaryPoint p = inv.apply(BoundaryPoint::at(ck.lo()));
    const BoundaryPoint q = inv.apply(BoundaryPoint::at(ck.hi()));
    if (p.infinite || q.infinite || !(p.x * q.x < 0)) return {inf, 0};
    double t = 0.5 * std::log(-p.x * q.x);
    if (k == last && t < 1e-9) return {inf, 0};
    if (t < 0) t = 0; // start on the boundary heading inward
    return {t, k};
}

/// Forward horocycle crossing of the stable horocycle m * n(eps * s), s > 0.
inline std::pair<double, int> next_horocycle_crossing(const LoomSurface& surf, const ScaledFrame& f, int eps,
                                                      int last, int& grazes) {
    double best = std::numeric_limits<double>::infinity();
    int best_k = 0;
    const Mat2 inv = f.m.inverse();
    for (int k = 1; k <= surf.size(); ++k) {
        const ChartCircle ck = surf.circle_scaled(k, f.c);
        if (!(ck.radius > 0) || !std::isfinite(ck.center)) continue;
        const BoundaryPoint p = inv.apply(BoundaryPoint::at(ck.lo()));
        const BoundaryPoint q = inv.apply(BoundaryPoint::at(ck.hi()));
        const double floor_t = k == last ? 1e-9 : -1e-12;
        auto consider = [&](double x) {
            double t = eps * x;
            if (t > floor_t && t < best) {
                best = std::max(t, 0.0);
                best_k = k;
            }
        };
        if (p.infinite || q.infinite) {
            consider(p.infinite ? q.x : p.x);
            continue;
        }
        const double mid = 0.5 * (p.x + q.x);
        const double rad = 0.5 * std::abs(q.x - p.x);
        const double disc = (rad - 1) * (rad + 1);
        if (std::abs(disc) <= 1e-12 * std::max(1.0, rad * rad)) {
            ++grazes;
            continue;
        }
        if (disc < 0) continue;
        const double root = std::sqrt(disc);
        // the roots multiply to p*q + 1; use that for the one near cancellation
        const double far = mid + std::copysign(root, mid);
        const double near = far != 0 ? (p.x * q.x + 1) / far : mid - root;
        consider(far);
        consider(near);
    }
    return {best, best_k};
}

} // namespace detail

/// Trace for signed length `length`; negative traces the reversed tangent.
inline Trajectory trace_geodesic(const SurfaceTangent& start, double length, const LoomSurface& surf,
                                 const TraceOptions& opts = {}) {
    if (!std::isfinite(length)) fail(ErrorCode::domain, "trace length must be finite");
    Trajectory traj;
    traj.kind = TraceKind::geodesic;
    traj.flipped = length < 0;
    traj.signed_time = length;
    traj.total_time = std::abs(length);
    ScaledFrame f = frame_of(start);
    if (traj.flipped) f.m = f.m * kFlip;
    f = f.recentred();
    if (opts.schedule && opts.schedule->initial && !traj.flipped) f.m = detail::project_onto(*opts.schedule->initial, f);
    detail::check_start(surf, f);
    detail::check_not_boundary(surf, f.m, f.c);

    int sheet = start.base.sheet;
    double t = 0, remaining = traj.total_time;
    int last = 0;
    while (true) {
        auto [tc, k] = detail::next_geodesic_crossing(surf, f, last);
        if (k == 0 || tc >= remaining || static_cast<int>(traj.crossings.size()) >= opts.max_crossings) {
            traj.arcs.push_back({f, 1, sheet, t, traj.total_time, 0});
            break;
        }
        traj.arcs.push_back({f, 1, sheet, t, t + tc, k});
        traj.crossings.push_back({t + tc, k, sheet, 1 - sheet});
        const Mat2 hit = f.m * geodesic_flow(tc);
        const Isometry refl = surf.reflection_scaled(k, f.c);
        ScaledFrame next{f.c, (refl.m * sigma_conjugate(hit)).normalized()};
        next = next.recentred();
        const std::size_t n = traj.crossings.size();
        if (opts.schedule && n <= opts.schedule->after_crossing.size())
            next.m = detail::project_onto(opts.schedule->after_crossing[n - 1], next);
        f = next;
        sheet = 1 - sheet;
        last = k;
        t += tc;
        remaining -= tc;
    }
    return traj;
}

/// Horocycle arc of signed length through start. Stable keeps the forward
/// geodesic endpoint, unstable the backward one.
inline Trajectory trace_horocycle(const SurfaceTangent& start, double length, const LoomSurface& surf,
                                  HoroDirection direction, int max_crossings = 10000000) {
    if (!std::isfinite(length)) fail(ErrorCode::domain, "trace length must be finite");
    Trajectory traj;
    traj.kind = TraceKind::horocycle;
    traj.flipped = direction == HoroDirection::unstable;
    traj.signed_time = length;
    traj.total_time = std::abs(length);
    ScaledFrame f = frame_of(start);
    // the unstable horocycle m*u(r) is the stable horocycle of m*kFlip at -r
    if (traj.flipped) f.m = f.m * kFlip;
    f = f.recentred();
    detail::check_start(surf, f);
    int eps = (length < 0 ? -1 : 1) * (traj.flipped ? -1 : 1);

    int sheet = start.base.sheet;
    double t = 0, remaining = traj.total_time;
    int last = 0;
    while (true) {
        auto [tc, k] = detail::next_horocycle_crossing(surf, f, eps, last, traj.grazes);
        if (k == 0 || tc >= remaining || static_cast<int>(traj.crossings.size()) >= max_crossings) {
            traj.arcs.push_back({f, eps, sheet, t, traj.total_time, 0});
            break;
        }
        traj.arcs.push_back({f, eps, sheet, t, t + tc, k});
        traj.crossings.push_back({t + tc, k, sheet, 1 - sheet});
        const Mat2 hit = f.m * stable_horocycle(eps * tc);
        const Isometry refl = surf.reflection_scaled(k, f.c);
        f = ScaledFrame{f.c, (refl.m * sigma_conjugate(hit)).normalized()}.recentred();
        eps = -eps;
        sheet = 1 - sheet;
        last = k;
        t += tc;
        remaining -= tc;
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Slack and the Busemann-type function

struct SlackValue {
    double value = 0;
    bool infinite = false;
    double horizon = 0;
};

/// Length minus tau progress over [t1, t2] of the trajectory.
inline double slack_between(const Trajectory& traj, double t1, double t2) {
    return (t2 - t1) - (traj.tau(t2) - traj.tau(t1));
}

inline SlackValue slack(const Trajectory& traj) {
    return {slack_between(traj, 0, traj.total_time), false, traj.total_time};
}

/// Divergence heuristic: slack(t)/t > ratio at every checkpoint in [T/2, T].
inline bool slack_diverges(const Trajectory& traj, double ratio = 0.5, int checkpoints = 9) {
    const double horizon = traj.total_time;
    if (!(horizon > 0)) return false;
    for (int i = 0; i < checkpoints; ++i) {
        const double t = horizon * (0.5 + 0.5 * i / (checkpoints - 1));
        if (!(slack_between(traj, 0, t) / t > ratio)) return false;
    }
    return true;
}

struct BusemannValue {
    double value = 0;
    bool minus_infinity = false;
    double slack = 0;
    double horizon = 0;
};

inline BusemannValue busemann(const SurfaceTangent& y, double horizon, const LoomSurface& surf,
                              const TraceOptions& opts = {}) {
    if (!(horizon > 0)) fail(ErrorCode::domain, "horizon must be positive");
    const Trajectory traj = trace_geodesic(y, horizon, surf, opts);
    BusemannValue out;
    out.slack = slack(traj).value;
    out.horizon = horizon;
    out.value = tau(y.base) - out.slack;
    out.minus_infinity = slack_diverges(traj);
    return out;
}

inline std::vector<int> crossing_sequence(const Trajectory& traj) {
    std::vector<int> out;
    for (const auto& c : traj.crossings) out.push_back(c.index);
    return out;
}

inline bool strictly_increasing(const std::vector<int>& seq) {
    for (std::size_t i = 1; i < seq.size(); ++i)
        if (!(seq[i] > seq[i - 1])) return false;
    return true;
}

/// Orientation-reversing-aware isometry sending developed points to folded
/// ones on the arc with `crossings_so_far` crossings: R_{k_n} ... R_{k_1}.
inline Isometry fold_isometry(const Trajectory& traj, std::size_t crossings_so_far, const LoomSurface& surf) {
    Isometry f = Isometry::identity();
    for (std::size_t i = 0; i < crossings_so_far && i < traj.crossings.size(); ++i)
        f = surf.reflection(traj.crossings[i].index) * f;
    return f;
}

// ---------------------------------------------------------------------------
// Start frames on prescribed lines

/// Tangent on the developed line (unscaled chart endpoints) at band real part
/// tau0, pointing toward e_plus, on sheet `sheet`.
inline SurfaceTangent tangent_on_line(const GeodesicLine& line, double tau0, int sheet = 0) {
    const GeodesicLine scaled{detail::scale_point(line.e_minus, tau0), detail::scale_point(line.e_plus, tau0)};
    const Mat2 p = line_frame(scaled);
    // points of the line at |w| = 1 in the scaled chart: intersect with the unit semicircle
    const BoundaryPoint a = p.inverse().apply(BoundaryPoint::at(-1));
    const BoundaryPoint b = p.inverse().apply(BoundaryPoint::at(1));
    double height;
    if (a.infinite || b.infinite) {
        height = std::abs(a.infinite ? b.x : a.x);
    } else {
        if (!(a.x * b.x < 0)) fail(ErrorCode::domain, "line does not reach the requested band real part");
        height = std::sqrt(-a.x * b.x);
    }
    const ScaledFrame f{tau0, (p * geodesic_flow(std::log(height))).normalized()};
    return tangent_of(f, sheet);
}

// ---------------------------------------------------------------------------
// CSV dump

inline void write_csv(std::ostream& os, const Trajectory& traj, double step) {
    if (!(step > 0)) fail(ErrorCode::domain, "sample step must be positive");
    os << "time,sheet,band_x,band_y,tau,cum_length,crossing_index\n";
    struct Row {
        double t;
        int sheet;
        int crossing;
    };
    std::vector<Row> rows;
    const auto n = static_cast<long>(std::floor(traj.total_time / step + 1e-9));
    for (long i = 0; i <= n; ++i) rows.push_back({i * step, -1, 0});
    if (rows.back().t < traj.total_time) rows.push_back({traj.total_time, -1, 0});
    for (const auto& c : traj.crossings) rows.push_back({c.time, c.to_sheet, c.index});
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
    char buf[256];
    const double sgn = traj.signed_time < 0 ? -1 : 1;
    for (const auto& r : rows) {
        const SurfaceTangent y = traj.tangent(r.t);
        const int sheet = r.sheet >= 0 ? r.sheet : y.base.sheet;
        std::snprintf(buf, sizeof buf, "%.9g,%d,%.9g,%.9g,%.9g,%.9g,", sgn * r.t, sheet, y.base.z.x, y.base.z.y,
                      y.base.z.x, r.t);
        os << buf;
        if (r.crossing) os << r.crossing;
        os << '\n';
    }
}

} // namespace loomlab
