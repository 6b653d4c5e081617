#pragma once

// SVG figures of the band model: the strip, excised half-planes, the core
// line and sampled trajectories colored by sheet.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "loomlab/format.hpp"
#include "loomlab/surface.hpp"
#include "loomlab/tracer.hpp"

namespace loomlab {

struct RenderOptions {
    double width = 1200;
    double height = 360;
    double sample_step = 0.05;
    double margin = 2; // band units added left and right
    double x_lo = NAN, x_hi = NAN; // visible range; NaN picks it from the content
};

namespace detail {

struct SvgFrame {
    double x0, x1, w, h;
    double px(double x) const { return (x - x0) / (x1 - x0) * w; }
    double py(double y) const { return (kHalfPi - y) / kPi * h; }
};

inline std::string fmt_xy(double x, double y) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g,%.9g", x, y);
    return buf;
}

/// Boundary of D_h(s) in the band, from one footprint end to the other.
inline std::vector<BandPoint> boundary_curve(double s, double h, int n = 240) {
    const ChartCircle c = boundary_circle(s, h);
    std::vector<BandPoint> pts;
    for (int i = 1; i < n; ++i) {
        // uniform in the hyperbolic parameter keeps the ends dense
        const double t = -12 + 24.0 * i / n;
        const double phi = 2 * std::atan(std::exp(-t));
        pts.push_back(complex_to_band({c.center + c.radius * std::cos(phi), c.radius * std::sin(phi)}));
    }
    return pts;
}

} // namespace detail

inline std::string render_svg(const LoomSurface* surf, const std::vector<Trajectory>& trajs, const RenderOptions& opt = {}) {
    double lo = 0, hi = 0;
    bool any = false;
    auto extend = [&](double x) {
        lo = any ? std::min(lo, x) : x;
        hi = any ? std::max(hi, x) : x;
        any = true;
    };
    if (surf)
        for (int k = 1; k <= surf->size(); ++k) extend(surf->entry(k).s);
    std::vector<std::vector<std::pair<BandPoint, int>>> samples;
    for (const auto& tr : trajs) {
        std::vector<std::pair<BandPoint, int>> pts;
        const long n = static_cast<long>(std::ceil(tr.total_time / opt.sample_step));
        for (long i = 0; i <= n; ++i) {
            const double t = std::min(tr.total_time, static_cast<double>(i) * opt.sample_step);
            const SurfaceTangent y = tr.tangent(t);
            pts.push_back({y.base.z, y.base.sheet});
            extend(y.base.z.x);
        }
        samples.push_back(std::move(pts));
    }
    if (!any) {
        lo = -1;
        hi = 1;
    }
    detail::SvgFrame fr{std::isnan(opt.x_lo) ? lo - opt.margin : opt.x_lo, std::isnan(opt.x_hi) ? hi + opt.margin : opt.x_hi,
                        opt.width, opt.height};
    if (!(fr.x1 > fr.x0)) fr.x1 = fr.x0 + 1;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << g9(opt.width) << "\" height=\"" << g9(opt.height)
       << "\" viewBox=\"0 0 " << g9(opt.width) << ' ' << g9(opt.height) << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << g9(opt.width) << "\" height=\"" << g9(opt.height)
       << "\" fill=\"#ffffff\" stroke=\"#000000\"/>\n";
    if (surf) {
        for (int k = 1; k <= surf->size(); ++k) {
            const auto& e = surf->entry(k);
            const auto curve = detail::boundary_curve(e.s, e.h);
            os << "<polygon class=\"halfplane\" data-index=\"" << k << "\" fill=\"#bbbbbb\" stroke=\"#555555\" points=\"";
            for (const auto& p : curve) os << detail::fmt_xy(fr.px(p.x), fr.py(p.y)) << ' ';
            os << detail::fmt_xy(fr.px(curve.back().x), 0) << ' ' << detail::fmt_xy(fr.px(curve.front().x), 0);
            os << "\"/>\n";
        }
    }
    os << "<line class=\"core\" x1=\"0\" y1=\"" << g9(fr.py(0)) << "\" x2=\"" << g9(opt.width) << "\" y2=\""
       << g9(fr.py(0)) << "\" stroke=\"#000000\" stroke-dasharray=\"6,4\"/>\n";
    static const char* colors[2] = {"#1f4fd1", "#d12a1f"};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& pts = samples[i];
        std::size_t j = 0;
        while (j < pts.size()) {
            const int sheet = pts[j].second;
            os << "<polyline class=\"trajectory\" data-trajectory=\"" << i << "\" data-sheet=\"" << sheet
               << "\" fill=\"none\" stroke=\"" << colors[sheet & 1] << "\" stroke-width=\"1.5\" points=\"";
            std::size_t k = j;
            while (k < pts.size() && pts[k].second == sheet) {
                os << detail::fmt_xy(fr.px(pts[k].first.x), fr.py(pts[k].first.y)) << ' ';
                ++k;
            }
            os << "\"/>\n";
            j = k;
        }
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace loomlab
