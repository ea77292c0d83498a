#include "log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string_view>

namespace tiia::log {

Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("TIIA_LOG");
    if (env == nullptr) return Level::Warn;
    const std::string_view v(env);
    if (v == "error" || v == "0") return Level::Error;
    if (v == "info" || v == "2") return Level::Info;
    if (v == "debug" || v == "3") return Level::Debug;
    return Level::Warn;
  }();
  return level;
}

void write(Level level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  static std::mutex mu;
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "tiia[" << names[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace tiia::log
