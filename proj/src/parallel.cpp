#include "dnls/parallel.hpp"

#include <atomic>

namespace dnls {

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_max_threads(unsigned n) { g_threads = n == 0 ? 1 : n; }
unsigned max_threads() { return g_threads; }

}  // namespace dnls
