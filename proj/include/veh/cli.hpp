#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace veh::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericError = 3;

/// Entry point behind the `vehopt` executable. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace veh::cli
