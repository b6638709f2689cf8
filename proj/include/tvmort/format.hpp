#pragma once

#include <cstdio>
#include <string>

namespace tvmort {

/// 17 significant digits: exact round trip and byte-stable output.
inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace tvmort
