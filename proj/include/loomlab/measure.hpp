#pragma once

// Empirical horocycle measures near x_0: the section A U x_0, its N-windows
// B_R, occupation statistics along the stable horocycle orbit of x_0.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "loomlab/error.hpp"
#include "loomlab/hyperbolic.hpp"
#include "loomlab/parallel.hpp"
#include "loomlab/surface.hpp"
#include "loomlab/tracer.hpp"

namespace loomlab {

struct SectionSpec {
    double delta = 0; // injectivity radius budget at x_0
    double c = 0, d = 0;
    double eta = 0;
};

struct SectionChoice {
    SectionSpec sec;
    double sheet_distance_at_x0 = 0;
    bool c_diverges = false;
    bool d_diverges = false;
    std::vector<double> rejected; // candidate endpoints whose rays kept finite slack
};

inline void check_section(const SectionSpec& sec) {
    if (!(sec.delta > 0)) fail(ErrorCode::domain, "section delta must be positive");
    if (!(sec.eta > 0 && sec.eta < sec.delta / 4)) fail(ErrorCode::domain, "section eta must lie in (0, delta/4)");
    if (!(sec.c < sec.d)) fail(ErrorCode::domain, "section needs c < d");
    if (!(sec.c > -sec.eta / 2 && sec.d < sec.eta / 2)) fail(ErrorCode::domain, "(c, d) must lie inside (-eta/2, eta/2)");
}

/// Frame of x_0: base (0,0) on sheet 0 pointing along increasing tau.
inline SurfaceTangent x0_tangent() { return {{{0, 0}, 0}, 0}; }

/// Ray A_+ u_r x_0 in the group notation: right multiplication by [1 0; r 1].
inline bool perturbed_ray_diverges(double r, const LoomSurface& surf, double horizon) {
    const ScaledFrame f0 = frame_of(x0_tangent());
    const SurfaceTangent y = tangent_of({f0.c, f0.m * unstable_horocycle(r)}, 0);
    return slack_diverges(trace_geodesic(y, horizon, surf));
}

/// delta is half the sheet-to-sheet distance at x_0 (each sheet is simply
/// connected, so every essential loop crosses twice); eta = delta/8; c and d
/// are the first candidates in (-eta/2, 0) and (0, eta/2) whose u-perturbed
/// rays have diverging slack.
inline SectionChoice choose_section(const LoomSurface& surf, double horizon = 200) {
    SectionChoice out;
    out.sheet_distance_at_x0 = sheet_distance({0, 0}, surf);
    out.sec.delta = out.sheet_distance_at_x0 / 2;
    out.sec.eta = out.sec.delta / 8;
    const double half = out.sec.eta / 2;
    const std::vector<double> fractions{0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875};
    auto pick = [&](double sign, bool& ok) {
        for (double f : fractions) {
            const double r = sign * half * f;
            if (perturbed_ray_diverges(r, surf, horizon)) {
                ok = true;
                return r;
            }
            out.rejected.push_back(r);
        }
        ok = false;
        return sign * half * 0.5;
    };
    out.sec.c = pick(-1, out.c_diverges);
    out.sec.d = pick(1, out.d_diverges);
    return out;
}

struct BruhatCoords {
    double s = 0, t = 0, r = 0;
};

/// g is the relative frame y = n_s a_t u_r x_0.
inline std::optional<BruhatCoords> section_membership(const Mat2& g, const SectionSpec& sec, double R) {
    if (!(R > 0 && R < sec.delta / 4)) fail(ErrorCode::precondition, "window half-width must lie in (0, delta/4)");
    NauCoordinates nc;
    try {
        nc = nau_decompose(g);
    } catch (const Error&) {
        return std::nullopt;
    }
    const double q = sec.delta / 4;
    if (std::abs(nc.s) < R && std::abs(nc.t) < q && nc.r > sec.c && nc.r < sec.d) return BruhatCoords{nc.s, nc.t, nc.r};
    return std::nullopt;
}

struct WindowSample {
    double time = 0; // N-time along the orbit of x_0
    BruhatCoords at;
};

struct Visit {
    double start = 0, end = 0;
    bool interior = true; // false when cut by the ends of [-T, T]
    double length() const { return end - start; }
};

struct EmpiricalMeasure {
    double R = 0;
    double T = 0;
    SectionSpec sec;
    double step = 0;
    std::array<int, 3> shape{8, 8, 8};
    std::array<double, 3> origin{};
    std::array<double, 3> bin{};
    std::vector<double> weights; // normalized, row-major over (s, t, r)
    double total_time = 0;
    double orbit_time_in_window = 0;
    std::vector<WindowSample> samples;
    std::vector<Visit> visits;

    double bin_diameter() const { return std::sqrt(bin[0] * bin[0] + bin[1] * bin[1] + bin[2] * bin[2]); }
};

/// In-window samples of the stable horocycle orbit of x_0 over [-T, T].
struct OrbitScan {
    double T = 0;
    double step = 0;
    double R = 0;
    SectionSpec sec;
    std::vector<WindowSample> samples;
    std::vector<Visit> visits;
};

inline double default_step(const SectionSpec& sec, double R, int bins_s = 8) {
    return std::min(sec.eta, 2 * R / bins_s) / 4;
}

inline OrbitScan scan_orbit(const LoomSurface& surf, const SectionSpec& sec, double R, double T, double step) {
    check_section(sec);
    if (!(R > 0 && R < sec.delta / 4)) fail(ErrorCode::precondition, "window half-width must lie in (0, delta/4)");
    if (!(T > 0) || !std::isfinite(T)) fail(ErrorCode::domain, "T must be positive");
    if (!(step > 0)) fail(ErrorCode::domain, "sampling step must be positive");
    OrbitScan scan{T, step, R, sec, {}, {}};
    const Mat2 base = frame_of(x0_tangent()).at_scale(0);
    const long n = static_cast<long>(std::floor(T / step));
    std::array<Trajectory, 2> halves;
    parallel_for(2, [&](std::size_t i) {
        halves[i] = trace_horocycle(x0_tangent(), i == 0 ? -T : T, surf, HoroDirection::stable);
    });
    const std::size_t count = static_cast<std::size_t>(2 * n + 1);
    std::vector<std::optional<BruhatCoords>> hit(count);
    const std::size_t chunks = std::min<std::size_t>(count, 64);
    parallel_for(chunks, [&](std::size_t ch) {
        for (std::size_t j = ch; j < count; j += chunks) {
            const long k = static_cast<long>(j) - n;
            const Trajectory& tr = halves[k < 0 ? 0 : 1];
            const double elapsed = std::abs(static_cast<double>(k)) * step;
            if (tr.sheet(elapsed) != 0) continue;
            const ScaledFrame f = tr.frame(elapsed);
            if (std::abs(f.tau()) > 2) continue;
            hit[j] = section_membership(bruhat::relative_frame(base, f.at_scale(0)), sec, R);
        }
    });
    bool open = false;
    for (std::size_t j = 0; j < count; ++j) {
        const double t = (static_cast<double>(j) - static_cast<double>(n)) * step;
        if (hit[j]) {
            scan.samples.push_back({t, *hit[j]});
            if (!open) scan.visits.push_back({t, t, j > 0});
            scan.visits.back().end = t + step;
            open = true;
        } else {
            open = false;
        }
    }
    if (!scan.visits.empty() && hit[count - 1]) scan.visits.back().interior = false;
    return scan;
}

/// Restricts a scan to a smaller window.
inline OrbitScan restrict_scan(const OrbitScan& scan, double R) {
    if (!(R > 0 && R <= scan.R)) fail(ErrorCode::precondition, "restriction needs a smaller window");
    OrbitScan out{scan.T, scan.step, R, scan.sec, {}, {}};
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& w : scan.samples) {
        if (!(std::abs(w.at.s) < R)) continue;
        out.samples.push_back(w);
        if (w.time - prev > 1.5 * scan.step) out.visits.push_back({w.time, w.time, true});
        out.visits.back().end = w.time + scan.step;
        prev = w.time;
    }
    return out;
}

inline EmpiricalMeasure measure_from_scan(const OrbitScan& scan, std::array<int, 3> shape = {8, 8, 8}) {
    EmpiricalMeasure mu;
    mu.R = scan.R;
    mu.T = scan.T;
    mu.sec = scan.sec;
    mu.step = scan.step;
    mu.shape = shape;
    mu.total_time = 2 * scan.T;
    mu.samples = scan.samples;
    mu.visits = scan.visits;
    mu.orbit_time_in_window = static_cast<double>(scan.samples.size()) * scan.step;
    if (!(mu.orbit_time_in_window > 0))
        fail(ErrorCode::undefined_measure, "orbit never enters the window; increase T");
    const double q = scan.sec.delta / 4;
    mu.origin = {-scan.R, -q, scan.sec.c};
    mu.bin = {2 * scan.R / shape[0], 2 * q / shape[1], (scan.sec.d - scan.sec.c) / shape[2]};
    mu.weights.assign(static_cast<std::size_t>(shape[0]) * shape[1] * shape[2], 0.0);
    for (const auto& w : scan.samples) {
        const double x[3] = {w.at.s, w.at.t, w.at.r};
        std::size_t idx = 0;
        for (int a = 0; a < 3; ++a) {
            int b = static_cast<int>(std::floor((x[a] - mu.origin[a]) / mu.bin[a]));
            b = std::clamp(b, 0, shape[a] - 1);
            idx = idx * shape[a] + b;
        }
        mu.weights[idx] += scan.step;
    }
    for (double& v : mu.weights) v /= mu.orbit_time_in_window;
    return mu;
}

inline EmpiricalMeasure estimate_nu(const LoomSurface& surf, const SectionSpec& sec, double R, double T,
                                    double step = 0) {
    if (step <= 0) step = default_step(sec, R);
    return measure_from_scan(scan_orbit(surf, sec, R, T, step));
}

// ---------------------------------------------------------------------------
// Checks

struct TightnessReport {
    double eps = 0;
    double eta = 0;
    double mass = 0; // mass of the shrunken window |s| < R - eta
    bool satisfied = false;
};

/// Shrinks the window by eta, which must stay below eps R / 4; a negative
/// eta picks eps R / 8.
inline TightnessReport check_tightness(const EmpiricalMeasure& mu, double eps, double eta = -1) {
    if (!(eps > 0 && eps <= 1)) fail(ErrorCode::domain, "eps must lie in (0, 1]");
    if (eta < 0) eta = eps * mu.R / 8;
    if (!(eta < eps * mu.R / 4)) fail(ErrorCode::precondition, "tightness needs eta < eps R / 4");
    TightnessReport rep{eps, eta, 0, false};
    double inner = 0;
    for (const auto& w : mu.samples)
        if (std::abs(w.at.s) < mu.R - eta) inner += mu.step;
    rep.mass = inner / mu.orbit_time_in_window;
    rep.satisfied = rep.mass >= 1 - eps;
    return rep;
}

/// Indicator of a box in (s, t, r) coordinates, scaled by `value`.
struct BoxFunction {
    BruhatCoords lo, hi;
    double value = 1;
    double operator()(const BruhatCoords& x) const {
        return (x.s >= lo.s && x.s < hi.s && x.t >= lo.t && x.t < hi.t && x.r >= lo.r && x.r < hi.r) ? value : 0;
    }
};

struct FlowInvarianceReport {
    double shift = 0;
    double nu_f = 0;
    double nu_shifted = 0;
    double difference = 0;
    double bound = 0;        // 2 s |f| / occupation time
    double sampling_error = 0;
    bool pass = false;
};

inline FlowInvarianceReport check_flow_invariance(const EmpiricalMeasure& mu, double shift, const BoxFunction& f) {
    const double q = mu.sec.delta / 4;
    const auto inside = [&](double s_lo, double s_hi) {
        return s_lo > -mu.R && s_hi < mu.R && f.lo.t > -q && f.hi.t < q && f.lo.r > mu.sec.c && f.hi.r < mu.sec.d;
    };
    if (!inside(f.lo.s, f.hi.s) || !inside(f.lo.s - shift, f.hi.s - shift))
        fail(ErrorCode::precondition, "test function or its shift leaves the window");
    FlowInvarianceReport rep;
    rep.shift = shift;
    for (const auto& w : mu.samples) {
        rep.nu_f += f(w.at) * mu.step;
        rep.nu_shifted += f({w.at.s + shift, w.at.t, w.at.r}) * mu.step;
    }
    rep.nu_f /= mu.orbit_time_in_window;
    rep.nu_shifted /= mu.orbit_time_in_window;
    rep.difference = std::abs(rep.nu_shifted - rep.nu_f);
    rep.bound = 2 * std::abs(shift) * std::abs(f.value) / mu.orbit_time_in_window;
    // each visit can gain or lose one sample at either box edge
    rep.sampling_error = 2 * static_cast<double>(mu.visits.size()) * mu.step * std::abs(f.value) / mu.orbit_time_in_window;
    rep.pass = rep.difference <= rep.bound + rep.sampling_error;
    return rep;
}

struct RestrictionReport {
    double R1 = 0, R2 = 0;
    double C = 0; // occupation(R1) / occupation(R2)
    double max_bin_discrepancy = 0;
    double bin_diameter = 0;
    bool pass = false;
};

/// Restricts nu^{R2} to B_{R1}, renormalizes, and compares bin by bin with nu^{R1}.
inline RestrictionReport check_restriction(const OrbitScan& scan2, double R1, std::array<int, 3> shape = {8, 8, 8}) {
    const OrbitScan scan1 = restrict_scan(scan2, R1);
    const EmpiricalMeasure mu1 = measure_from_scan(scan1, shape);
    const EmpiricalMeasure mu2 = measure_from_scan(scan2, shape);
    RestrictionReport rep;
    rep.R1 = R1;
    rep.R2 = scan2.R;
    rep.C = mu1.orbit_time_in_window / mu2.orbit_time_in_window;
    rep.bin_diameter = mu1.bin_diameter();
    // nu^{R2} restricted: re-bin its window samples on the R1 grid
    std::vector<double> restricted(mu1.weights.size(), 0.0);
    double mass = 0;
    for (const auto& w : mu2.samples) {
        if (!(std::abs(w.at.s) < R1)) continue;
        const double x[3] = {w.at.s, w.at.t, w.at.r};
        std::size_t idx = 0;
        for (int a = 0; a < 3; ++a) {
            int b = static_cast<int>(std::floor((x[a] - mu1.origin[a]) / mu1.bin[a]));
            b = std::clamp(b, 0, shape[a] - 1);
            idx = idx * shape[a] + b;
        }
        restricted[idx] += mu2.step / mu2.orbit_time_in_window;
        mass += mu2.step / mu2.orbit_time_in_window;
    }
    for (std::size_t i = 0; i < restricted.size(); ++i)
        rep.max_bin_discrepancy = std::max(rep.max_bin_discrepancy, std::abs(restricted[i] / mass - mu1.weights[i]));
    rep.pass = rep.C <= 1 + 1e-12 && rep.max_bin_discrepancy <= 2 * rep.bin_diameter;
    return rep;
}

inline double total_mass(const EmpiricalMeasure& mu) {
    double m = 0;
    for (double w : mu.weights) m += w;
    return m;
}

} // namespace loomlab
