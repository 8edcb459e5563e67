#include "streamforge/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <string>

namespace streamforge {

namespace {

LogLevel parse_level(const char* value) {
  if (value == nullptr) return LogLevel::kWarn;
  std::string v(value);
  if (v == "off" || v == "0") return LogLevel::kOff;
  if (v == "error") return LogLevel::kError;
  if (v == "warn") return LogLevel::kWarn;
  if (v == "info") return LogLevel::kInfo;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

const char* level_tag(LogLevel level) {
  switch (level) {
    case LogLevel::kError: return "E";
    case LogLevel::kWarn: return "W";
    case LogLevel::kInfo: return "I";
    case LogLevel::kDebug: return "D";
    default: return "?";
  }
}

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

LogLevel log_level() {
  static const LogLevel level = parse_level(std::getenv("STREAMFORGE_LOG"));
  return level;
}

void log_message(LogLevel level, std::string_view message) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::lock_guard<std::mutex> lock(log_mutex());
  std::fprintf(stderr, "[streamforge %s] %.*s\n", level_tag(level),
               static_cast<int>(message.size()), message.data());
}

}  // namespace streamforge
