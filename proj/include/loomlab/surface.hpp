#pragma once

// Loom surfaces: the double of the band minus a sequence of disjoint
// half-planes D_h(s), together with the tight map and the designers that
// produce summable or distal prefixes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "loomlab/crossing.hpp"
#include "loomlab/error.hpp"
#include "loomlab/hyperbolic.hpp"
#include "loomlab/interval_set.hpp"

namespace loomlab {

struct HalfPlaneSpec {
    double s = 0;
    double h = 0.5;
};

enum class TailPolicy { empty };

struct LoomSurfaceSpec {
    std::vector<HalfPlaneSpec> entries;
    double gap_floor = 0;
    TailPolicy tail_policy = TailPolicy::empty;
    std::string meta_json = "{}";
};

struct SurfacePoint {
    BandPoint z;
    int sheet = 0;
};

inline double tau(const SurfacePoint& p) { return p.z.x; }

/// Largest |s| for which exp(s) chart coordinates stay comfortably finite.
inline constexpr double kMaxChartScale = 650.0;

struct ValidationReport {
    bool ok = false;
    bool heights_in_range = true;
    bool monotone = true;
    bool disjoint = true;
    bool within_chart_range = true;
    std::optional<std::pair<int, int>> offending_pair; // 1-based indices
    double min_boundary_distance = std::numeric_limits<double>::infinity();
    double sup_h = 0;
    std::vector<double> gaps; // d(dD_k, dD_{k+1}) along the prefix
    bool gaps_increasing = true;
    std::vector<std::string> messages;
};

inline ValidationReport validate(const LoomSurfaceSpec& spec) {
    if (spec.entries.empty()) fail(ErrorCode::precondition, "surface spec needs at least one entry");
    ValidationReport rep;
    const auto& es = spec.entries;
    for (std::size_t k = 0; k < es.size(); ++k) {
        const auto& e = es[k];
        if (!std::isfinite(e.s) || !std::isfinite(e.h) || !(e.h > 0 && e.h < kHalfPi)) {
            rep.heights_in_range = false;
            rep.messages.push_back("entry " + std::to_string(k + 1) + " has h outside (0, pi/2) or non-finite values");
            continue;
        }
        if (std::abs(e.s) > kMaxChartScale) {
            rep.within_chart_range = false;
            rep.messages.push_back("entry " + std::to_string(k + 1) + " has |s| beyond the chart range");
        }
        rep.sup_h = std::max(rep.sup_h, e.h);
        if (k > 0 && !(e.s > es[k - 1].s)) {
            rep.monotone = false;
            rep.messages.push_back("s is not strictly increasing at entry " + std::to_string(k + 1));
        }
    }
    if (!rep.heights_in_range || !rep.within_chart_range) return rep;

    // Closures are disjoint iff the chart footprints are disjoint closed intervals.
    struct Foot {
        double lo, hi;
        int k;
    };
    std::vector<Foot> feet;
    for (std::size_t k = 0; k < es.size(); ++k) {
        const ChartCircle c = boundary_circle(es[k].s, es[k].h);
        feet.push_back({c.lo(), c.hi(), static_cast<int>(k + 1)});
    }
    std::sort(feet.begin(), feet.end(), [](const Foot& a, const Foot& b) { return a.lo < b.lo; });
    for (std::size_t i = 0; i + 1 < feet.size(); ++i) {
        const Foot& a = feet[i];
        const Foot& b = feet[i + 1];
        if (!(a.hi < b.lo)) {
            rep.disjoint = false;
            if (!rep.offending_pair) rep.offending_pair = std::make_pair(std::min(a.k, b.k), std::max(a.k, b.k));
            continue;
        }
        const double d = dist_geodesics(GeodesicLine{BoundaryPoint::at(a.lo), BoundaryPoint::at(a.hi)},
                                        GeodesicLine{BoundaryPoint::at(b.lo), BoundaryPoint::at(b.hi)});
        rep.min_boundary_distance = std::min(rep.min_boundary_distance, d);
    }
    if (!rep.disjoint) {
        rep.min_boundary_distance = 0;
        rep.messages.push_back("closures of D_" + std::to_string(rep.offending_pair->first) + " and D_" +
                               std::to_string(rep.offending_pair->second) + " intersect");
    }

    for (std::size_t k = 0; k + 1 < es.size(); ++k) {
        rep.gaps.push_back(dist_geodesics(perpendicular_boundary_geodesic(es[k].s, es[k].h),
                                          perpendicular_boundary_geodesic(es[k + 1].s, es[k + 1].h)));
        if (k > 0 && !(rep.gaps[k] > rep.gaps[k - 1])) rep.gaps_increasing = false;
    }
    if (!rep.gaps_increasing)
        rep.messages.push_back("prefix gaps are not strictly increasing; divergence cannot be certified");
    rep.ok = rep.monotone && rep.disjoint;
    return rep;
}

/// A validated, immutable surface prefix with its boundary circles,
/// reflections and a footprint index over the chart real axis.
class LoomSurface {
public:
    explicit LoomSurface(LoomSurfaceSpec spec) : spec_(std::move(spec)) {
        report_ = validate(spec_);
        if (!report_.ok) {
            std::string msg = "invalid loom surface";
            if (!report_.messages.empty()) msg += ": " + report_.messages.front();
            fail(ErrorCode::validation, msg);
        }
        for (const auto& e : spec_.entries) {
            circles_.push_back(boundary_circle(e.s, e.h));
            reflections_.push_back(circle_reflection(circles_.back()));
        }
        for (std::size_t k = 0; k < circles_.size(); ++k)
            index_.push_back({circles_[k].lo(), circles_[k].hi(), static_cast<int>(k + 1)});
        std::sort(index_.begin(), index_.end(), [](const Foot& a, const Foot& b) { return a.lo < b.lo; });
        // footprints as log|u| ranges; every circle sits on the negative axis
        for (std::size_t k = 0; k < circles_.size(); ++k) {
            const auto& e = spec_.entries[k];
            log_index_.push_back({e.s + std::log(std::tan(e.h / 2)), e.s - std::log(std::tan(e.h / 2)),
                                  static_cast<int>(k + 1)});
        }
        std::sort(log_index_.begin(), log_index_.end(), [](const Foot& a, const Foot& b) { return a.lo < b.lo; });
    }

    const LoomSurfaceSpec& spec() const { return spec_; }
    const ValidationReport& report() const { return report_; }
    int size() const { return static_cast<int>(circles_.size()); }

    // 1-based accessors
    const HalfPlaneSpec& entry(int k) const { return spec_.entries.at(k - 1); }
    const ChartCircle& circle(int k) const { return circles_.at(k - 1); }
    const Isometry& reflection(int k) const { return reflections_.at(k - 1); }
    GeodesicLine boundary(int k) const { return perpendicular_boundary_geodesic(entry(k).s, entry(k).h); }

    /// Calls fn(k) for every boundary whose footprint meets [lo, hi].
    template <class Fn>
    void for_each_candidate(double lo, double hi, Fn&& fn) const {
        auto it = std::lower_bound(index_.begin(), index_.end(), lo,
                                   [](const Foot& f, double v) { return f.hi < v; });
        for (; it != index_.end() && it->lo <= hi; ++it) fn(it->k);
    }

    /// Index of the excised open half-plane containing w, or 0.
    int excised_index(Complex w, double eps = tol::coincidence) const {
        int hit = 0;
        for_each_candidate(w.real(), w.real(), [&](int k) {
            const ChartCircle& c = circle(k);
            if (std::abs(w - Complex{c.center, 0}) < c.radius * (1 - eps)) hit = k;
        });
        return hit;
    }

    bool in_closure(const BandPoint& z) const { return excised_scaled(band_to_complex({0, z.y}), z.x) == 0; }

    /// Index k whose footprint strictly contains the negative real number
    /// -exp(log_abs), or 0.
    int footprint_at_log(double log_abs) const {
        auto it = std::upper_bound(log_index_.begin(), log_index_.end(), log_abs,
                                   [](double v, const Foot& f) { return v < f.lo; });
        if (it == log_index_.begin()) return 0;
        --it;
        return (log_abs > it->lo && log_abs < it->hi) ? it->k : 0;
    }

    /// Boundary circle k in the chart scaled by exp(-c).
    ChartCircle circle_scaled(int k, double c) const {
        const auto& e = entry(k);
        const double scale = std::exp(e.s - c);
        return {-scale / std::sin(e.h), scale / std::tan(e.h)};
    }

    Isometry reflection_scaled(int k, double c) const { return circle_reflection(circle_scaled(k, c)); }

    /// Excised half-plane containing the scaled chart point w (true point e^c w), or 0.
    int excised_scaled(Complex w, double c, double eps = tol::coincidence) const {
        if (!(w.imag() > 0)) return 0;
        const int k = footprint_at_log(std::log(std::abs(w)) + c);
        if (k == 0) return 0;
        const ChartCircle ck = circle_scaled(k, c);
        return std::abs(w - Complex{ck.center, 0}) < ck.radius * (1 - eps) ? k : 0;
    }

private:
    struct Foot {
        double lo, hi;
        int k;
    };
    LoomSurfaceSpec spec_;
    ValidationReport report_;
    std::vector<ChartCircle> circles_;
    std::vector<Isometry> reflections_;
    std::vector<Foot> index_;
    std::vector<Foot> log_index_;
};

/// Length of the shortest single-crossing path from (z,0) to (z,1).
inline double sheet_distance(const BandPoint& z, const LoomSurface& surface) {
    if (surface.size() == 0) fail(ErrorCode::precondition, "empty surface spec");
    const Complex w = band_to_complex(z);
    if (!surface.in_closure(z)) fail(ErrorCode::precondition, "point lies inside an excised half-plane");
    double best = std::numeric_limits<double>::infinity();
    // d(w, R_k w) is twice the distance from w to the mirror
    for (int k = 1; k <= surface.size(); ++k) {
        const ChartCircle& c = surface.circle(k);
        best = std::min(best, 2 * dist_point_circle(w, c.center, c.radius));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Designers

/// Smallest shift D >= 0 such that the boundaries of D_{h_a}(0) and
/// D_{h_b}(D) are at distance >= target.
inline double required_shift(double h_a, double h_b, double target) {
    const auto gap_at = [&](double shift) {
        return dist_geodesics(perpendicular_boundary_geodesic(0, h_a), perpendicular_boundary_geodesic(shift, h_b));
    };
    double lo = std::log(1 / std::tan(h_a / 2)) - std::log(std::tan(h_b / 2)); // footprints touch
    lo = std::max(lo, 0.0);
    if (gap_at(lo) >= target) return lo;
    double hi = lo + target + 4;
    while (gap_at(hi) < target) hi += target + 4;
    for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (gap_at(mid) >= target ? hi : lo) = mid;
    }
    return hi;
}

/// s_1 = 0 and each step s_{k+1} - s_k is the least shift putting the
/// boundaries of D_k and D_{k+1} at distance gap_growth * k, so the prefix
/// gaps grow strictly. offset_out receives max_k (step_k - gap_growth * k).
inline std::vector<HalfPlaneSpec> schedule_positions(const std::vector<double>& heights, double gap_growth,
                                                     double* offset_out = nullptr) {
    if (!(gap_growth > 0)) fail(ErrorCode::domain, "gap growth must be positive");
    std::vector<HalfPlaneSpec> out;
    double s = 0, g0 = 0;
    for (std::size_t k = 0; k < heights.size(); ++k) {
        if (k > 0) {
            const double target = gap_growth * static_cast<double>(k);
            // a hair of slack so the certified gap is not lost to rounding
            const double step = required_shift(heights[k - 1], heights[k], target + 1e-9);
            g0 = std::max(g0, step - target);
            s += step;
        }
        out.push_back({s, heights[k]});
    }
    if (offset_out) *offset_out = g0;
    return out;
}

struct DecayRule {
    enum class Kind { inverse_power, geometric, constant };
    Kind kind = Kind::inverse_power;
    double scale = 1;
    double param = 1; // exponent p, or ratio q

    double height(int k) const {
        switch (kind) {
        case Kind::inverse_power: return scale / std::pow(static_cast<double>(k), param);
        case Kind::geometric: return scale * std::pow(param, k - 1);
        case Kind::constant: return scale;
        }
        return scale;
    }

    /// "inverse:a" (a/k), "power:a,p" (a/k^p), "geometric:a,q" (a q^(k-1)), "constant:c".
    static DecayRule parse(const std::string& text) {
        const auto colon = text.find(':');
        if (colon == std::string::npos) fail(ErrorCode::parse, "decay rule must look like kind:args");
        const std::string kind = text.substr(0, colon);
        std::vector<double> args;
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                args.push_back(std::stod(item));
            } catch (const std::exception&) {
                fail(ErrorCode::parse, "bad number in decay rule: " + item);
            }
        }
        DecayRule r;
        if (kind == "inverse" && args.size() == 1) {
            r = {Kind::inverse_power, args[0], 1};
        } else if (kind == "power" && args.size() == 2) {
            r = {Kind::inverse_power, args[0], args[1]};
        } else if (kind == "geometric" && args.size() == 2) {
            r = {Kind::geometric, args[0], args[1]};
        } else if (kind == "constant" && args.size() == 1) {
            r = {Kind::constant, args[0], 0};
        } else {
            fail(ErrorCode::parse, "unknown decay rule: " + text);
        }
        return r;
    }
};

struct DesignResult {
    LoomSurfaceSpec spec;
    std::vector<double> slacks;       // crossing slack of each entry
    std::vector<double> partial_sums; // running sums of slacks
    double gap_offset = 0;            // g0 of the position schedule
    bool summable_trend = true;
    std::vector<std::string> warnings;
};

inline DesignResult design_summable(const DecayRule& rule, int count, double gap_growth = 1.0) {
    if (count < 1) fail(ErrorCode::domain, "count must be at least 1");
    std::vector<double> heights;
    for (int k = 1; k <= count; ++k) {
        const double h = rule.height(k);
        if (!(h > 0 && h < kHalfPi)) fail(ErrorCode::domain, "decay rule gives h outside (0, pi/2) at k = " + std::to_string(k));
        heights.push_back(h);
    }
    DesignResult out;
    out.spec.entries = schedule_positions(heights, gap_growth, &out.gap_offset);
    double sum = 0;
    for (double h : heights) {
        out.slacks.push_back(crossing_slack(h));
        sum += out.slacks.back();
        out.partial_sums.push_back(sum);
    }
    // Tail trend: slope of log(term) against log(k) over the second half.
    const int first = count >= 6 ? count / 2 : 1;
    if (count - first + 1 >= 3) {
        std::vector<double> xs, ys;
        for (int k = first; k <= count; ++k) {
            xs.push_back(std::log(static_cast<double>(k)));
            ys.push_back(std::log(out.slacks[k - 1]));
        }
        const double slope = least_squares(xs, ys).slope;
        out.summable_trend = slope < -1.1;
        if (!out.summable_trend) {
            std::ostringstream msg;
            msg << "not summable: slack terms decay like k^" << slope << ", partial sums keep growing";
            out.warnings.push_back(msg.str());
        }
    } else {
        out.warnings.push_back("prefix too short to assess summability");
    }
    out.spec.gap_floor = validate(out.spec).min_boundary_distance;
    out.spec.meta_json = R"({"designer":"summable"})";
    return out;
}

struct DistalDesign {
    LoomSurfaceSpec spec;
    std::vector<double> scheduled_slacks; // e value assigned to each entry
    std::vector<double> dense_subset;     // enumeration order of the chosen values
    double gap_offset = 0;
};

/// Deterministic dense enumeration of E: interval midpoints, then dyadic
/// refinements level by level. Degenerate intervals contribute one point.
inline std::vector<std::pair<double, int>> dense_points(const IntervalSet& e, int max_points) {
    std::vector<std::pair<double, int>> pts; // value, level
    for (const auto& iv : e.intervals()) pts.push_back({0.5 * (iv.lo + iv.hi), 0});
    for (int level = 1; static_cast<int>(pts.size()) < max_points && level < 30; ++level) {
        bool grew = false;
        for (const auto& iv : e.intervals()) {
            if (iv.length() <= 0) continue;
            const double denom = std::ldexp(1.0, level + 1);
            for (long j = 0; j < (1L << level) && static_cast<int>(pts.size()) < max_points; ++j) {
                const double x = iv.lo + iv.length() * (2.0 * static_cast<double>(j) + 1) / denom;
                pts.push_back({x, level});
                grew = true;
            }
        }
        if (!grew) break;
    }
    return pts;
}

inline DistalDesign design_from_E(const IntervalSet& e, int count, double gap_growth) {
    if (count < 1) fail(ErrorCode::domain, "count must be at least 1");
    if (e.empty()) fail(ErrorCode::domain, "empty slack set");
    if (!(e.min() > 0)) fail(ErrorCode::domain, "slack set must lie in (0, inf) for a distal surface");
    const auto pts = dense_points(e, count);
    DistalDesign out;
    for (const auto& p : pts) out.dense_subset.push_back(p.first);

    // Pass p cycles through every point of level <= p, so each chosen value
    // recurs in all later passes.
    int pass = 0;
    while (static_cast<int>(out.scheduled_slacks.size()) < count) {
        bool emitted = false;
        for (const auto& p : pts) {
            if (p.second > pass) continue;
            out.scheduled_slacks.push_back(p.first);
            emitted = true;
            if (static_cast<int>(out.scheduled_slacks.size()) == count) break;
        }
        if (!emitted) fail(ErrorCode::domain, "no points to schedule");
        ++pass;
    }
    std::vector<double> heights;
    for (double v : out.scheduled_slacks) heights.push_back(height_for_slack(v));
    out.spec.entries = schedule_positions(heights, gap_growth, &out.gap_offset);
    out.spec.gap_floor = validate(out.spec).min_boundary_distance;
    out.spec.meta_json = R"({"designer":"distal"})";
    return out;
}

} // namespace loomlab
