#pragma once

// Minimal leveled logging to stderr; level from PEELLAB_LOG (error|warn|info|debug).

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace peellab::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline Level& threshold() {
  static Level lvl = [] {
    const char* env = std::getenv("PEELLAB_LOG");
    if (!env) return Level::Warn;
    const std::string_view s(env);
    if (s == "error") return Level::Error;
    if (s == "info") return Level::Info;
    if (s == "debug") return Level::Debug;
    return Level::Warn;
  }();
  return lvl;
}

inline void write(Level lvl, const std::string& msg) {
  if (static_cast<int>(lvl) > static_cast<int>(threshold())) return;
  static std::mutex mu;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[peellab " << names[static_cast<int>(lvl)] << "] " << msg << '\n';
}

inline void warn(const std::string& m) { write(Level::Warn, m); }
inline void info(const std::string& m) { write(Level::Info, m); }
inline void debug(const std::string& m) { write(Level::Debug, m); }

}  // namespace peellab::log
