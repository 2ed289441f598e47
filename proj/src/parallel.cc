#include "persuasion/parallel.h"

#include <atomic>
#include <cstdlib>
#include <string>

namespace persuasion {

namespace {

int initial_limit() {
  if (const char* env = std::getenv("PERSUASION_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int>& limit_slot() {
  static std::atomic<int> limit{initial_limit()};
  return limit;
}

}  // namespace

int thread_limit() { return limit_slot().load(); }

void set_thread_limit(int threads) { limit_slot().store(threads > 0 ? threads : initial_limit()); }

}  // namespace persuasion
