#pragma once

#include <cstdio>
#include <string>

namespace loomlab {

/// %.9g text of x.
inline std::string g9(double x) {
    if (x == 0) x = 0; // no "-0"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

} // namespace loomlab
