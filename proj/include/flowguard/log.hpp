#pragma once

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

namespace flowguard {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

// Level comes from FLOWGUARD_LOG (debug|info|warn|error|off); default warn.
inline LogLevel logLevel() {
  static const LogLevel level = [] {
    const char* env = std::getenv("FLOWGUARD_LOG");
    if (!env) return LogLevel::Warn;
    const std::string v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    if (v == "warn") return LogLevel::Warn;
    if (v == "error") return LogLevel::Error;
    if (v == "off") return LogLevel::Off;
    return LogLevel::Warn;
  }();
  return level;
}

inline void logLine(LogLevel level, const char* tag, const std::string& msg) {
  if (level < logLevel()) return;
  std::cerr << "[" << tag << "] " << msg << '\n';
}

}  // namespace flowguard

#define FG_LOG_AT(level, tag, expr)                            \
  do {                                                         \
    if ((level) >= ::flowguard::logLevel()) {                  \
      std::ostringstream fg_log_ss_;                           \
      fg_log_ss_ << expr;                                      \
      ::flowguard::logLine((level), (tag), fg_log_ss_.str());  \
    }                                                          \
  } while (0)

#define FG_LOG_DEBUG(expr) FG_LOG_AT(::flowguard::LogLevel::Debug, "debug", expr)
#define FG_LOG_INFO(expr) FG_LOG_AT(::flowguard::LogLevel::Info, "info", expr)
#define FG_LOG_WARN(expr) FG_LOG_AT(::flowguard::LogLevel::Warn, "warn", expr)
#define FG_LOG_ERROR(expr) FG_LOG_AT(::flowguard::LogLevel::Error, "error", expr)
