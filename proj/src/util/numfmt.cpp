#include "gsim/util/numfmt.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace gsim::util {

std::string format_double(double value) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument("format_double: non-finite value");
    }
    char buf[40];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) {
            return buf;
        }
    }
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

} // namespace gsim::util
