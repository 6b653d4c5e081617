#pragma once

#include <cmath>

#include "loomlab/error.hpp"
#include "loomlab/hyperbolic.hpp"

namespace loomlab {

inline void require_height(double h) {
    if (!(h > 0 && h < kHalfPi)) fail(ErrorCode::domain, "height must lie in (0, pi/2)");
}

/// Slack of the single crossing through a boundary of height h, written as
/// 2 ln cosh of the distance from the core line to height h.
inline double crossing_slack_cosh_form(double h) {
    require_height(h);
    return 2 * std::log(std::cosh(std::atanh(std::sin(h))));
}

/// Same quantity after cosh(atanh(sin h)) = 1 / cos h.
inline double crossing_slack(double h) {
    require_height(h);
    return -2 * std::log(std::cos(h));
}

/// Inverse of crossing_slack: the height whose crossing has slack e > 0.
inline double height_for_slack(double e) {
    if (!(e > 0) || !std::isfinite(e)) fail(ErrorCode::domain, "crossing slack must be positive and finite");
    return std::acos(std::exp(-e / 2));
}

} // namespace loomlab
