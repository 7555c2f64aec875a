#include "logflat/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace logflat::log {

namespace {

Level from_env() {
  const char* raw = std::getenv("LOGFLAT_LOG");
  if (raw == nullptr) return Level::Warn;
  const std::string v(raw);
  if (v == "debug") return Level::Debug;
  if (v == "info") return Level::Info;
  if (v == "off") return Level::Off;
  return Level::Warn;
}

std::atomic<int>& state() {
  static std::atomic<int> level{static_cast<int>(from_env())};
  return level;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Level threshold() { return static_cast<Level>(state().load()); }

void set_threshold(Level level) { state().store(static_cast<int>(level)); }

void write(Level level, std::string_view message) {
  if (level < threshold() || level == Level::Off) return;
  static constexpr std::string_view names[] = {"debug", "info", "warn"};
  std::lock_guard lock(sink_mutex());
  std::cerr << "[logflat " << names[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace logflat::log
