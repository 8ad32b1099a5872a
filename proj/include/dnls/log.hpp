#pragma once

#include <string>

namespace dnls::log {

/// Print a warning to stderr the first time `key` is seen in this process.
void warn_once(const std::string& key, const std::string& message);

/// Silence warnings (used by tests and the acceptance driver).
void set_quiet(bool quiet);

}  // namespace dnls::log
