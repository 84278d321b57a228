#pragma once

#include <string>

namespace veh {

/// Scientific notation with 17 significant digits, '.' separator ("%.16e").
std::string format_sci(double x);

} // namespace veh
