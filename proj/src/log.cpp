#include "formsim/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

namespace formsim {

namespace {

LogLevel parse_threshold() {
  const char* env = std::getenv("FORMSIM_LOG_LEVEL");
  if (env == nullptr) return LogLevel::kWarn;
  const std::string value(env);
  if (value == "error") return LogLevel::kError;
  if (value == "warn") return LogLevel::kWarn;
  if (value == "info") return LogLevel::kInfo;
  if (value == "debug") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::kError:
      return "error";
    case LogLevel::kWarn:
      return "warn";
    case LogLevel::kInfo:
      return "info";
    default:
      return "debug";
  }
}

}  // namespace

LogLevel log_threshold() {
  static const LogLevel threshold = parse_threshold();
  return threshold;
}

void log_message(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(log_threshold())) return;
  std::fprintf(stderr, "[formsim][%s] %s\n", level_name(level), message.c_str());
}

}  // namespace formsim
