#pragma once

#include <cstdio>
#include <string>

namespace lensrig {

// 17 significant digits: every double reads back exactly.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace lensrig
