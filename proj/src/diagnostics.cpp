#include "cbwk/diagnostics.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace cbwk::diag {

namespace {
std::atomic<bool> g_muted{false};
std::mutex g_mutex;
} // namespace

void warn(std::string_view msg) {
  if (g_muted.load(std::memory_order_relaxed))
    return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[cbwk] warning: " << msg << '\n';
}

void set_muted(bool muted) { g_muted.store(muted, std::memory_order_relaxed); }

bool muted() { return g_muted.load(std::memory_order_relaxed); }

} // namespace cbwk::diag
