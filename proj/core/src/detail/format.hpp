#pragma once

#include <cstdio>
#include <string>

namespace rayloc::detail {

// Fixed-format float for CSV output. Locale-independent and byte-stable
// for equal inputs, which the simulate command relies on.
inline std::string csv_num(double v, int precision = 9) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

inline std::string csv_sci(double v, int precision = 9) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

}  // namespace rayloc::detail
