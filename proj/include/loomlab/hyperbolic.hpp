#pragma once

// Plane hyperbolic geometry in the band model {|Im z| < pi/2}, metric
// |dz|/cos(Im z), and in the upper half-plane chart w = i*exp(z).
//
// Frame convention: an orientation-preserving matrix F stands for the unit
// tangent vector at F(i) pointing along F_*(d/dv). Right multiplication by
// geodesic_flow(t) moves forward along the geodesic, stable_horocycle(s)
// keeps the forward endpoint, unstable_horocycle(r) keeps the backward one.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "loomlab/error.hpp"

namespace loomlab {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2;

namespace tol {
inline constexpr double coincidence = 1e-10;
inline constexpr double integration = 1e-9;
inline constexpr double reported = 1e-6;
} // namespace tol

struct BandPoint {
    double x = 0;
    double y = 0;
};

struct ChartPoint {
    double u = 0;
    double v = 1;
};

inline bool is_valid(const BandPoint& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::abs(p.y) < kHalfPi;
}

inline bool is_valid(const ChartPoint& p) {
    return std::isfinite(p.u) && std::isfinite(p.v) && p.v > 0;
}

inline Complex to_complex(const ChartPoint& p) { return {p.u, p.v}; }
inline ChartPoint to_chart_point(Complex w) { return {w.real(), w.imag()}; }

inline ChartPoint band_to_chart(const BandPoint& p) {
    const double scale = std::exp(p.x);
    return {-scale * std::sin(p.y), scale * std::cos(p.y)};
}

inline BandPoint chart_to_band(const ChartPoint& p) {
    return {std::log(std::hypot(p.u, p.v)), std::atan2(-p.u, p.v)};
}

inline Complex band_to_complex(const BandPoint& p) { return to_complex(band_to_chart(p)); }
inline BandPoint complex_to_band(Complex w) { return chart_to_band(to_chart_point(w)); }

/// Band real part of a chart point, i.e. log|w|.
inline double chart_tau(Complex w) { return std::log(std::abs(w)); }

inline double dist_chart(Complex a, Complex b) {
    const double num = std::abs(a - b);
    if (num == 0) return 0;
    return 2 * std::asinh(num / (2 * std::sqrt(a.imag() * b.imag())));
}

inline double dist(const BandPoint& p, const BandPoint& q) {
    return dist_chart(band_to_complex(p), band_to_complex(q));
}

// ---------------------------------------------------------------------------
// Boundary points and 2x2 matrices

struct BoundaryPoint {
    double x = 0;
    bool infinite = false;

    static BoundaryPoint at(double value) { return {value, false}; }
    static BoundaryPoint infinity() { return {0, true}; }
};

inline bool same_point(const BoundaryPoint& a, const BoundaryPoint& b, double eps = tol::coincidence) {
    if (a.infinite || b.infinite) return a.infinite == b.infinite;
    return std::abs(a.x - b.x) <= eps * std::max(1.0, std::max(std::abs(a.x), std::abs(b.x)));
}

struct Mat2 {
    double a = 1, b = 0, c = 0, d = 1;

    static constexpr Mat2 identity() { return {1, 0, 0, 1}; }

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
    Mat2 transpose() const { return {a, c, b, d}; }
    Mat2 inverse() const {
        const double k = det();
        return {d / k, -b / k, -c / k, a / k};
    }
    Mat2 operator-() const { return {-a, -b, -c, -d}; }

    /// Scaled to det 1, sign chosen so the trace is positive when nonzero.
    Mat2 normalized() const {
        const double k = det();
        if (!(k > 0)) fail(ErrorCode::domain, "matrix with non-positive determinant");
        const double s = 1 / std::sqrt(k);
        Mat2 out{a * s, b * s, c * s, d * s};
        if (out.trace() < 0 || (out.trace() == 0 && (out.a < 0 || (out.a == 0 && out.b < 0)))) out = -out;
        return out;
    }

    Complex apply(Complex w) const { return (a * w + b) / (c * w + d); }

    BoundaryPoint apply(const BoundaryPoint& p) const {
        if (p.infinite) {
            if (c == 0) return BoundaryPoint::infinity();
            return BoundaryPoint::at(a / c);
        }
        const double den = c * p.x + d;
        if (den == 0) return BoundaryPoint::infinity();
        return BoundaryPoint::at((a * p.x + b) / den);
    }

    /// arg of the derivative at w: the rotation applied to tangent directions.
    double rotation_at(Complex w) const { return -2 * std::arg(c * w + d); }

    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
};

inline double max_abs_diff(const Mat2& x, const Mat2& y) {
    return std::max({std::abs(x.a - y.a), std::abs(x.b - y.b), std::abs(x.c - y.c), std::abs(x.d - y.d)});
}

/// Distance between projective classes (equality up to sign).
inline double projective_diff(const Mat2& x, const Mat2& y) {
    return std::min(max_abs_diff(x, y), max_abs_diff(x, -y));
}

/// sigma * M * sigma, where sigma(w) = -conj(w) is the reflection in the imaginary axis.
inline Mat2 sigma_conjugate(const Mat2& m) { return {m.a, -m.b, -m.c, m.d}; }

// ---------------------------------------------------------------------------
// Isometries: w -> M(w) or w -> M(-conj(w)) with det M = 1.

struct Isometry {
    Mat2 m = Mat2::identity();
    bool reversing = false;

    static Isometry identity() { return {}; }
    static Isometry mirror() { return {Mat2::identity(), true}; }

    Complex apply(Complex w) const {
        if (reversing) w = -std::conj(w);
        return m.apply(w);
    }

    BoundaryPoint apply(BoundaryPoint p) const {
        if (reversing && !p.infinite) p.x = -p.x;
        return m.apply(p);
    }

    /// Image of the direction `angle` (chart radians) attached at w.
    double push_angle(Complex w, double angle) const {
        if (reversing) {
            w = -std::conj(w);
            angle = kPi - angle;
        }
        return angle + m.rotation_at(w);
    }

    Isometry inverse() const {
        const Mat2 inv = m.inverse();
        return {reversing ? sigma_conjugate(inv) : inv, reversing};
    }

    Isometry normalized() const { return {m.normalized(), reversing}; }

    /// Composition (f * g)(w) = f(g(w)).
    friend Isometry operator*(const Isometry& f, const Isometry& g) {
        const Mat2 inner = f.reversing ? sigma_conjugate(g.m) : g.m;
        return Isometry{(f.m * inner), f.reversing != g.reversing}.normalized();
    }
};

inline bool approx_equal(const Isometry& f, const Isometry& g, double eps = tol::coincidence) {
    return f.reversing == g.reversing && projective_diff(f.m.normalized(), g.m.normalized()) <= eps;
}

// ---------------------------------------------------------------------------
// Frames (unit tangent vectors)

/// Frame at chart point w with direction `chart_angle` (pi/2 = straight up).
inline Mat2 frame_at(Complex w, double chart_angle) {
    const double sv = std::sqrt(w.imag());
    const Mat2 lift{sv, w.real() / sv, 0, 1 / sv};
    const double half = (chart_angle - kHalfPi) / 2;
    const Mat2 spin{std::cos(half), std::sin(half), -std::sin(half), std::cos(half)};
    return lift * spin;
}

inline Complex frame_point(const Mat2& f) { return f.apply(Complex{0, 1}); }
inline double frame_angle(const Mat2& f) { return kHalfPi + f.rotation_at(Complex{0, 1}); }

inline Mat2 geodesic_flow(double t) { return {std::exp(t / 2), 0, 0, std::exp(-t / 2)}; }
inline Mat2 stable_horocycle(double s) { return {1, s, 0, 1}; }
inline Mat2 unstable_horocycle(double r) { return {1, 0, r, 1}; }

/// Matrix notation of the group elements used for Bruhat coordinates:
/// n_s lower unipotent, a_t diagonal, u_r upper unipotent. A tangent vector
/// y with frame F_y near x_0 has relative frame transpose(F_x0^-1 F_y), so
/// y = n_s a_t u_r x_0 in that notation.
namespace bruhat {
inline Mat2 n(double s) { return {1, 0, s, 1}; }
inline Mat2 a(double t) { return geodesic_flow(t); }
inline Mat2 u(double r) { return {1, r, 0, 1}; }

inline Mat2 relative_frame(const Mat2& base, const Mat2& frame) {
    return (base.inverse() * frame).transpose();
}
} // namespace bruhat

struct NauCoordinates {
    double s = 0;
    double t = 0;
    double r = 0;
};

/// g = n_s a_t u_r. Throws decomposition error outside the open cell.
inline NauCoordinates nau_decompose(const Isometry& g) {
    if (g.reversing) fail(ErrorCode::decomposition, "orientation-reversing element has no NAU form");
    Mat2 m = g.m.normalized();
    if (m.a < 0) m = -m;
    if (m.a <= 1e-12) fail(ErrorCode::decomposition, "element outside the open Bruhat cell");
    return {m.c / m.a, 2 * std::log(m.a), m.b / m.a};
}

inline NauCoordinates nau_decompose(const Mat2& m) { return nau_decompose(Isometry{m, false}); }

// ---------------------------------------------------------------------------
// Geodesics

struct GeodesicLine {
    BoundaryPoint e_minus;
    BoundaryPoint e_plus;
};

/// Orientation-preserving P with P(0) = e_minus, P(inf) = e_plus, det 1.
inline Mat2 line_frame(const GeodesicLine& g) {
    const auto& lo = g.e_minus;
    const auto& hi = g.e_plus;
    if (same_point(lo, hi, 0)) fail(ErrorCode::domain, "geodesic endpoints coincide");
    if (hi.infinite) return {1, lo.x, 0, 1};
    if (lo.infinite) return {hi.x, -1, 1, 0};
    if (hi.x > lo.x) {
        const double k = 1 / std::sqrt(hi.x - lo.x);
        return {hi.x * k, lo.x * k, k, k};
    }
    const double k = 1 / std::sqrt(lo.x - hi.x);
    return {-hi.x * k, lo.x * k, -k, k};
}

inline GeodesicLine line_of_frame(const Mat2& f) {
    return {f.apply(BoundaryPoint::at(0)), f.apply(BoundaryPoint::infinity())};
}

inline GeodesicLine apply(const Isometry& g, const GeodesicLine& line) {
    return {g.apply(line.e_minus), g.apply(line.e_plus)};
}

/// Distance from w to the chart semicircle (center, radius); stays accurate
/// when w is far from the circle on the chart scale.
inline double dist_point_circle(Complex w, double center, double radius) {
    const double rho = std::abs(w - Complex{center, 0});
    return std::asinh(std::abs(rho - radius) * (rho + radius) / (2 * radius * w.imag()));
}

inline double dist_point_geodesic(Complex w, const GeodesicLine& g) {
    const auto& lo = g.e_minus;
    const auto& hi = g.e_plus;
    if (lo.infinite || hi.infinite) {
        const double foot = lo.infinite ? hi.x : lo.x;
        return std::asinh(std::abs(w.real() - foot) / w.imag());
    }
    return dist_point_circle(w, 0.5 * (lo.x + hi.x), 0.5 * std::abs(hi.x - lo.x));
}

inline double dist_geodesics(const GeodesicLine& g1, const GeodesicLine& g2) {
    const Mat2 to_axis = line_frame(g1).inverse();
    const BoundaryPoint p = to_axis.apply(g2.e_minus);
    const BoundaryPoint q = to_axis.apply(g2.e_plus);
    if (p.infinite || q.infinite) return 0;
    if (p.x * q.x <= 0) return 0;
    const double lo = std::min(std::abs(p.x), std::abs(q.x));
    const double hi = std::max(std::abs(p.x), std::abs(q.x));
    return 2 * std::atanh(std::sqrt(lo / hi));
}

/// The geodesic through chart points p != q, oriented from p toward q.
inline GeodesicLine geodesic_through(Complex p, Complex q) {
    if (std::abs(q.real() - p.real()) <= 1e-15 * std::max(std::abs(p), std::abs(q))) {
        const BoundaryPoint foot = BoundaryPoint::at(0.5 * (p.real() + q.real()));
        return q.imag() > p.imag() ? GeodesicLine{foot, BoundaryPoint::infinity()}
                                   : GeodesicLine{BoundaryPoint::infinity(), foot};
    }
    const double c = (std::norm(q) - std::norm(p)) / (2 * (q.real() - p.real()));
    const double r = std::abs(p - c);
    const BoundaryPoint lo = BoundaryPoint::at(c - r), hi = BoundaryPoint::at(c + r);
    return q.real() > p.real() ? GeodesicLine{lo, hi} : GeodesicLine{hi, lo};
}

inline Isometry reflect(const GeodesicLine& g) {
    const Isometry to_line{line_frame(g), false};
    return to_line * Isometry::mirror() * to_line.inverse();
}

/// Circle parameters of a finite-endpoint geodesic in the chart.
struct ChartCircle {
    double center = 0;
    double radius = 0;
    double lo() const { return center - radius; }
    double hi() const { return center + radius; }
};

/// Boundary of D_h(s): perpendicular to the band vertical Re z = s at s + hi.
inline GeodesicLine perpendicular_boundary_geodesic(double s, double h) {
    if (!(h > 0 && h < kHalfPi) || !std::isfinite(s)) fail(ErrorCode::domain, "half-plane height must lie in (0, pi/2)");
    const double scale = std::exp(s);
    return {BoundaryPoint::at(-scale * std::tan(h / 2)), BoundaryPoint::at(-scale / std::tan(h / 2))};
}

inline ChartCircle boundary_circle(double s, double h) {
    if (!(h > 0 && h < kHalfPi) || !std::isfinite(s)) fail(ErrorCode::domain, "half-plane height must lie in (0, pi/2)");
    const double scale = std::exp(s);
    return {-scale / std::sin(h), scale / std::tan(h)};
}

/// Reflection across a circle orthogonal to the real axis.
inline Isometry circle_reflection(const ChartCircle& c) {
    return reflect(GeodesicLine{BoundaryPoint::at(c.lo()), BoundaryPoint::at(c.hi())});
}

} // namespace loomlab
