#pragma once

// Witness search for recurrence times: even weaving patterns whose slack
// adds up to a target.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "loomlab/crossing.hpp"
#include "loomlab/error.hpp"
#include "loomlab/parallel.hpp"
#include "loomlab/surface.hpp"
#include "loomlab/tracer.hpp"
#include "loomlab/weaving.hpp"

namespace loomlab {

struct RecurrenceWitness {
    std::vector<int> pattern;
    double predicted_slack = 0;
    double traced_slack = 0;
    double base_distance = 0; // distance from x_0's base point to the developed line
    double min_gap = std::numeric_limits<double>::infinity();
};

struct RecurrenceReport {
    double target = 0;
    double tol = 0;
    bool found = false;
    RecurrenceWitness witness;
    long patterns_examined = 0;
};

struct RecurrenceOptions {
    int max_length = 8;
    long max_patterns = 2000000;
    double margin = 20;
};

namespace detail {

inline double pattern_min_gap(const std::vector<int>& p, const LoomSurface& surf) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < p.size(); ++j) g = std::min(g, std::abs(surf.entry(p[j]).s - surf.entry(p[j - 1]).s));
    return g;
}

} // namespace detail

/// Distance from the chart point i (base of x_0) to the developed line of a
/// pattern started on the geodesic through 0.
inline double pattern_base_distance(const std::vector<int>& p, const LoomSurface& surf) {
    return dist_point_geodesic(Complex{0, 1}, develop_word(p, 0, surf).line);
}

/// Traced slack of the pattern's developed ray, started well below its first crossing.
inline double traced_pattern_slack(const std::vector<int>& p, const LoomSurface& surf, double margin = 20) {
    return slack(build_weaving({p, Sign::plus}, surf, margin).traj).value;
}

/// Branch-and-bound over strictly increasing even-length patterns: partial
/// predicted slack only grows, so prefixes beyond t + tol are pruned.
inline RecurrenceReport recurrence_by_slack(double t, const LoomSurface& surf, double tol,
                                            const RecurrenceOptions& opts = {}) {
    if (!(t >= 0)) fail(ErrorCode::domain, "recurrence target must be non-negative");
    if (!(tol > 0)) fail(ErrorCode::domain, "tolerance must be positive");
    RecurrenceReport rep;
    rep.target = t;
    rep.tol = tol;
    if (t <= tol) {
        rep.found = true;
        rep.witness.base_distance = 0;
        return rep;
    }
    const int n = surf.size();
    std::vector<double> slack_of(n + 1);
    double min_slack = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= n; ++k) {
        slack_of[k] = crossing_slack(surf.entry(k).h);
        min_slack = std::min(min_slack, slack_of[k]);
    }

    struct Best {
        bool found = false;
        std::vector<int> pattern;
        double predicted = 0;
        double gap = -1;
        double base = 0;
    };
    std::vector<Best> best(n);
    std::vector<long> examined(n, 0);
    const long budget = std::max<long>(1, opts.max_patterns / std::max(1, n));

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t first) {
        std::vector<int> p{static_cast<int>(first) + 1};
        Best& b = best[first];
        long& count = examined[first];
        auto dfs = [&](auto&& self, double sum) -> void {
            if (count >= budget) return;
            ++count;
            if (p.size() % 2 == 0 && std::abs(sum - t) <= tol) {
                const double gap = detail::pattern_min_gap(p, surf);
                if (!b.found || gap > b.gap) {
                    const double base = pattern_base_distance(p, surf);
                    if (base <= tol) b = {true, p, sum, gap, base};
                }
            }
            if (static_cast<int>(p.size()) >= opts.max_length) return;
            if (sum + min_slack > t + tol) return;
            for (int k = p.back() + 1; k <= n; ++k) {
                if (sum + slack_of[k] > t + tol) continue;
                p.push_back(k);
                self(self, sum + slack_of[k]);
                p.pop_back();
            }
        };
        dfs(dfs, slack_of[first + 1]);
    });

    const Best* winner = nullptr;
    for (const auto& b : best) {
        if (b.found && (!winner || b.gap > winner->gap)) winner = &b;
    }
    for (long c : examined) rep.patterns_examined += c;
    if (!winner) return rep;
    rep.found = true;
    rep.witness.pattern = winner->pattern;
    rep.witness.predicted_slack = winner->predicted;
    rep.witness.min_gap = winner->gap;
    rep.witness.base_distance = winner->base;
    rep.witness.traced_slack = traced_pattern_slack(winner->pattern, surf, opts.margin);
    return rep;
}

} // namespace loomlab
