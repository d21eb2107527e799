#include "thermpc/log.hpp"

#include <atomic>
#include <iostream>

namespace thermpc::log {
namespace {
std::atomic<int> g_level{static_cast<int>(Level::Warning)};

void emit(Level at, const char* tag, std::string_view message) {
  if (g_level.load(std::memory_order_relaxed) >= static_cast<int>(at)) {
    std::cerr << "[thermpc " << tag << "] " << message << '\n';
  }
}
}  // namespace

void set_level(Level level) { g_level.store(static_cast<int>(level)); }
Level level() { return static_cast<Level>(g_level.load()); }

void warn(std::string_view message) { emit(Level::Warning, "warn", message); }
void info(std::string_view message) { emit(Level::Info, "info", message); }
void debug(std::string_view message) { emit(Level::Debug, "debug", message); }

}  // namespace thermpc::log
