#pragma once

#include <string>
#include <vector>

namespace popmc {

// Process-wide warning collector. Repeated messages are stored once.
void warn(const std::string& message);
std::vector<std::string> take_warnings();
std::size_t warning_count();
// Distinct warnings raised since start, including ones already taken.
std::size_t total_warnings();

}  // namespace popmc
