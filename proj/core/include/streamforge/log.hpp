#pragma once

#include <string_view>

namespace streamforge {

// Verbosity is read once from the STREAMFORGE_LOG environment variable:
// off | error | warn | info | debug (default: warn).
enum class LogLevel { kOff = 0, kError, kWarn, kInfo, kDebug };

LogLevel log_level();

void log_message(LogLevel level, std::string_view message);

inline void log_error(std::string_view m) { log_message(LogLevel::kError, m); }
inline void log_warn(std::string_view m) { log_message(LogLevel::kWarn, m); }
inline void log_info(std::string_view m) { log_message(LogLevel::kInfo, m); }
inline void log_debug(std::string_view m) { log_message(LogLevel::kDebug, m); }

}  // namespace streamforge
