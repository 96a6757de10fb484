#pragma once

#include <sstream>
#include <string>

namespace lanolem::log {

enum class Level { quiet = 0, info = 1, debug = 2 };

/// Level read once from LANOLEM_LOG (quiet | info | debug); defaults to quiet.
Level level();
void set_level(Level lvl);

void write(Level lvl, const std::string& msg);

template <typename... Args>
void info(const Args&... args) {
  if (level() < Level::info) return;
  std::ostringstream os;
  (os << ... << args);
  write(Level::info, os.str());
}

template <typename... Args>
void debug(const Args&... args) {
  if (level() < Level::debug) return;
  std::ostringstream os;
  (os << ... << args);
  write(Level::debug, os.str());
}

}  // namespace lanolem::log
