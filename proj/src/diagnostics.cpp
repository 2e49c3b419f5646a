#include "popmc/diagnostics.hpp"

#include <algorithm>
#include <mutex>
#include <utility>

namespace popmc {
namespace {

std::mutex g_mutex;
std::vector<std::string> g_warnings;
std::size_t g_total = 0;

}  // namespace

void warn(const std::string& message) {
  std::lock_guard lock(g_mutex);
  if (std::find(g_warnings.begin(), g_warnings.end(), message) == g_warnings.end()) {
    g_warnings.push_back(message);
    ++g_total;
  }
}

std::vector<std::string> take_warnings() {
  std::lock_guard lock(g_mutex);
  return std::exchange(g_warnings, {});
}

std::size_t warning_count() {
  std::lock_guard lock(g_mutex);
  return g_warnings.size();
}

std::size_t total_warnings() {
  std::lock_guard lock(g_mutex);
  return g_total;
}

}  // namespace popmc
