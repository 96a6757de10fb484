#include "lanolem/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string_view>

namespace lanolem::log {
namespace {

Level from_env() {
  const char* env = std::getenv("LANOLEM_LOG");
  if (env == nullptr) return Level::quiet;
  std::string_view v(env);
  if (v == "debug") return Level::debug;
  if (v == "info") return Level::info;
  return Level::quiet;
}

std::atomic<int>& current() {
  static std::atomic<int> lvl{static_cast<int>(from_env())};
  return lvl;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Level level() { return static_cast<Level>(current().load(std::memory_order_relaxed)); }

void set_level(Level lvl) { current().store(static_cast<int>(lvl), std::memory_order_relaxed); }

void write(Level lvl, const std::string& msg) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  std::cerr << (lvl == Level::debug ? "[debug] " : "[info] ") << msg << '\n';
}

}  // namespace lanolem::log
