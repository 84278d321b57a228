#include "veh/csv.hpp"

#include <cstdio>

namespace veh {

std::string format_sci(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

} // namespace veh
