#pragma once

// Compact subsets of the real line as finite unions of closed intervals,
// iterated Minkowski sums, the parity unions of sumsets and box counting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "loomlab/error.hpp"

namespace loomlab {

struct Interval {
    double lo = 0;
    double hi = 0;
    double length() const { return hi - lo; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, pairwise disjoint closed intervals; `delta` is the resolution at
/// which the union covers the set it stands for.
class IntervalSet {
public:
    IntervalSet() = default;

    IntervalSet(std::vector<Interval> intervals, double delta) : delta_(delta) {
        if (!(delta > 0) || !std::isfinite(delta)) fail(ErrorCode::domain, "interval set resolution must be positive");
        for (const auto& iv : intervals) {
            if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) fail(ErrorCode::domain, "interval endpoints must be finite");
            if (iv.lo > iv.hi) fail(ErrorCode::domain, "interval with lo > hi");
        }
        std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        for (const auto& iv : intervals) push_merged(iv);
    }

    static IntervalSet points(std::span<const double> values, double delta) {
        std::vector<Interval> ivs;
        ivs.reserve(values.size());
        for (double v : values) ivs.push_back({v, v});
        return IntervalSet(std::move(ivs), delta);
    }

    const std::vector<Interval>& intervals() const { return intervals_; }
    double delta() const { return delta_; }
    bool empty() const { return intervals_.empty(); }
    std::size_t size() const { return intervals_.size(); }
    double min() const { return intervals_.front().lo; }
    double max() const { return intervals_.back().hi; }

    double measure() const {
        double total = 0;
        for (const auto& iv : intervals_) total += iv.length();
        return total;
    }

    bool contains(double x, double eps = 0) const {
        auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x + eps,
                                   [](double v, const Interval& iv) { return v < iv.lo; });
        if (it == intervals_.begin()) return false;
        return x - eps <= std::prev(it)->hi;
    }

    /// Intersection with [lo, hi].
    IntervalSet clipped(double lo, double hi) const {
        IntervalSet out;
        out.delta_ = delta_;
        for (const auto& iv : intervals_) {
            const double a = std::max(lo, iv.lo);
            const double b = std::min(hi, iv.hi);
            if (a <= b) out.intervals_.push_back({a, b});
        }
        return out;
    }

    IntervalSet shifted(double offset) const {
        IntervalSet out = *this;
        for (auto& iv : out.intervals_) {
            iv.lo += offset;
            iv.hi += offset;
        }
        return out;
    }

    IntervalSet united(const IntervalSet& other) const {
        std::vector<Interval> all = intervals_;
        all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
        if (all.empty()) {
            IntervalSet out;
            out.delta_ = std::max(delta_, other.delta_);
            return out;
        }
        return IntervalSet(std::move(all), std::max(delta_, other.delta_));
    }

    /// Builder used by the sum routines: appends an interval whose lo is not
    /// smaller than the last one. Gaps of a few ulps are rounding noise from
    /// the endpoint sums and get closed.
    void push_merged(const Interval& iv) {
        if (!intervals_.empty() &&
            iv.lo <= intervals_.back().hi + 8 * std::numeric_limits<double>::epsilon() *
                                                std::max(1.0, std::abs(intervals_.back().hi))) {
            intervals_.back().hi = std::max(intervals_.back().hi, iv.hi);
        } else {
            intervals_.push_back(iv);
        }
    }

    void set_delta(double delta) { delta_ = delta; }

private:
    std::vector<Interval> intervals_;
    double delta_ = 1e-12;
};

inline bool approx_equal(const IntervalSet& a, const IntervalSet& b, double eps) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a.intervals()[i].lo - b.intervals()[i].lo) > eps) return false;
        if (std::abs(a.intervals()[i].hi - b.intervals()[i].hi) > eps) return false;
    }
    return true;
}

/// Exact Minkowski sum A + B, produced in sorted order by a k-way merge over
/// the shifted copies a_i + B.
inline IntervalSet minkowski_sum(const IntervalSet& a, const IntervalSet& b) {
    if (a.empty() || b.empty()) fail(ErrorCode::domain, "Minkowski sum of an empty set");
    const IntervalSet& outer = a.size() <= b.size() ? a : b;
    const IntervalSet& inner = a.size() <= b.size() ? b : a;
    const auto& os = outer.intervals();
    const auto& is = inner.intervals();

    struct Cursor {
        double lo;
        std::uint32_t outer_idx;
        std::uint32_t inner_idx;
    };
    auto later = [](const Cursor& x, const Cursor& y) { return x.lo > y.lo; };
    std::priority_queue<Cursor, std::vector<Cursor>, decltype(later)> heap(later);
    for (std::uint32_t i = 0; i < os.size(); ++i) heap.push({os[i].lo + is[0].lo, i, 0});

    IntervalSet out;
    out.set_delta(a.delta() + b.delta());
    while (!heap.empty()) {
        Cursor cur = heap.top();
        heap.pop();
        const auto& o = os[cur.outer_idx];
        const auto& n = is[cur.inner_idx];
        out.push_merged({o.lo + n.lo, o.hi + n.hi});
        if (cur.inner_idx + 1 < is.size()) {
            ++cur.inner_idx;
            cur.lo = o.lo + is[cur.inner_idx].lo;
            heap.push(cur);
        }
    }
    return out;
}

/// m-fold sum E + ... + E, resolution m * delta.
inline IntervalSet sumset(const IntervalSet& e, int m) {
    if (m < 1) fail(ErrorCode::domain, "sumset multiplicity must be at least 1");
    if (e.empty()) fail(ErrorCode::domain, "sumset of an empty set");
    IntervalSet acc = e;
    for (int i = 2; i <= m; ++i) acc = minkowski_sum(acc, e);
    acc.set_delta(m * e.delta());
    return acc;
}

enum class Parity { even, odd };

/// Union of mE intersected with [0, T] over the multiplicities m of the given
/// parity, m <= ceil(T / min E).
inline IntervalSet delta_sets(const IntervalSet& e, double horizon, Parity parity) {
    if (e.empty()) fail(ErrorCode::domain, "empty slack set");
    if (!(e.min() > 0)) fail(ErrorCode::domain, "slack set must stay away from 0 (distal surface)");
    if (!(horizon >= 0)) fail(ErrorCode::domain, "horizon must be non-negative");
    const int max_m = static_cast<int>(std::ceil(horizon / e.min()));
    IntervalSet result;
    result.set_delta(e.delta());
    bool any = false;
    IntervalSet current = e.clipped(0, horizon);
    for (int m = 1; m <= max_m && !current.empty(); ++m) {
        const bool wanted = (parity == Parity::even) == (m % 2 == 0);
        if (wanted) {
            result = any ? result.united(current) : current;
            any = true;
        }
        current = minkowski_sum(current, e).clipped(0, horizon);
    }
    result.set_delta(std::max(1, max_m) * e.delta());
    return result;
}

// ---------------------------------------------------------------------------
// Cantor-type generators

/// Level-n cover of the central Cantor set keeping two end pieces of relative
/// length `ratio` at each step; ratio 1/3 gives the middle-third set.
inline IntervalSet cantor_cover(int level, double ratio = 1.0 / 3.0, double offset = 0.0) {
    if (level < 0) fail(ErrorCode::domain, "Cantor level must be non-negative");
    if (!(ratio > 0 && ratio < 0.5)) fail(ErrorCode::domain, "Cantor ratio must lie in (0, 1/2)");
    std::vector<Interval> cur{{0, 1}};
    for (int l = 0; l < level; ++l) {
        std::vector<Interval> next;
        next.reserve(cur.size() * 2);
        for (const auto& iv : cur) {
            const double piece = iv.length() * ratio;
            next.push_back({iv.lo, iv.lo + piece});
            next.push_back({iv.hi - piece, iv.hi});
        }
        cur = std::move(next);
    }
    for (auto& iv : cur) {
        iv.lo += offset;
        iv.hi += offset;
    }
    return IntervalSet(std::move(cur), std::pow(ratio, level));
}

/// Level-n cover of {sum d_i base^-i : d_i in digits}.
inline IntervalSet digit_cantor_cover(int base, const std::vector<int>& digits, int level, double offset = 0.0) {
    if (base < 2 || digits.empty() || level < 0) fail(ErrorCode::domain, "invalid digit Cantor parameters");
    std::vector<double> starts{0.0};
    double width = 1.0;
    for (int l = 0; l < level; ++l) {
        width /= base;
        std::vector<double> next;
        next.reserve(starts.size() * digits.size());
        for (double s : starts)
            for (int d : digits) next.push_back(s + d * width);
        starts = std::move(next);
    }
    std::vector<Interval> ivs;
    ivs.reserve(starts.size());
    for (double s : starts) ivs.push_back({offset + s, offset + s + width});
    return IntervalSet(std::move(ivs), width);
}

/// ln|D_m| / ln(base) where D_m is the m-fold digit sumset; valid only while
/// D_m stays inside {0, ..., base-1} (no carries). Returns NaN otherwise.
inline double digit_sumset_dimension(int base, const std::vector<int>& digits, int m) {
    std::set<int> acc(digits.begin(), digits.end());
    for (int i = 2; i <= m; ++i) {
        std::set<int> next;
        for (int x : acc)
            for (int d : digits) next.insert(x + d);
        acc = std::move(next);
    }
    if (*acc.rbegin() >= base) return std::nan("");
    return std::log(static_cast<double>(acc.size())) / std::log(static_cast<double>(base));
}

// ---------------------------------------------------------------------------
// Box counting

struct DimensionEstimate {
    double value = 0;      // slope clamped to [0, 1]
    double raw_slope = 0;  // least-squares slope of log N(r) against log(1/r)
    std::vector<double> scales;
    std::vector<double> counts;
    double r2 = 0;
};

/// Number of grid boxes [k r, (k+1) r) meeting the set.
inline double box_count(const IntervalSet& s, double r) {
    constexpr double eps = 1e-9;
    double count = 0;
    bool have_last = false;
    double last = 0;
    for (const auto& iv : s.intervals()) {
        double first = std::floor(iv.lo / r + eps);
        double final = std::ceil(iv.hi / r - eps) - 1;
        if (final < first) final = first;
        if (have_last && first <= last) first = last + 1;
        if (final >= first) count += final - first + 1;
        if (!have_last || final > last) last = final;
        have_last = true;
    }
    return count;
}

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 1;
};

inline LinearFit least_squares(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    LinearFit fit;
    fit.slope = sxx > 0 ? sxy / sxx : 0;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

inline DimensionEstimate box_dimension(const IntervalSet& s, std::span<const double> scales) {
    if (scales.size() < 3) fail(ErrorCode::precondition, "box dimension needs at least 3 scales");
    if (s.empty()) fail(ErrorCode::domain, "box dimension of an empty set");
    DimensionEstimate est;
    std::vector<double> xs, ys;
    for (double r : scales) {
        if (!(r > 0)) fail(ErrorCode::domain, "box size must be positive");
        if (r < s.delta() * (1 - 1e-12))
            fail(ErrorCode::precondition, "box size " + std::to_string(r) + " below the cover resolution");
        const double n = box_count(s, r);
        est.scales.push_back(r);
        est.counts.push_back(n);
        xs.push_back(std::log(1 / r));
        ys.push_back(std::log(n));
    }
    const LinearFit fit = least_squares(xs, ys);
    est.raw_slope = fit.slope;
    est.value = std::clamp(fit.slope, 0.0, 1.0);
    est.r2 = fit.r2;
    return est;
}

/// base^-lo, ..., base^-hi
inline std::vector<double> geometric_scales(double base, int lo, int hi) {
    std::vector<double> out;
    for (int j = lo; j <= hi; ++j) out.push_back(std::pow(base, -j));
    return out;
}

} // namespace loomlab
