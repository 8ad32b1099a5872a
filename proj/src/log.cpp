#include "dnls/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <set>

namespace dnls::log {

namespace {
std::atomic<bool> g_quiet{false};
std::mutex g_mu;
std::set<std::string> g_seen;
}  // namespace

void warn_once(const std::string& key, const std::string& message) {
  std::lock_guard lock(g_mu);
  if (!g_seen.insert(key).second || g_quiet) return;
  std::cerr << "warning: " << message << '\n';
}

void set_quiet(bool quiet) { g_quiet = quiet; }

}  // namespace dnls::log
