#pragma once

#include <string>

namespace formsim {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Threshold read once from FORMSIM_LOG_LEVEL (error|warn|info|debug);
// defaults to warn, unrecognised values are ignored.
LogLevel log_threshold();

// Writes "[formsim][level] message" to stderr if level passes the threshold.
void log_message(LogLevel level, const std::string& message);

inline void log_error(const std::string& m) { log_message(LogLevel::kError, m); }
inline void log_warn(const std::string& m) { log_message(LogLevel::kWarn, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::kInfo, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::kDebug, m); }

}  // namespace formsim
