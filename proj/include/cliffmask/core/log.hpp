//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_CORE_LOG_HPP
#define CLIFFMASK_CORE_LOG_HPP

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace cliffmask {

enum class LogLevel : int { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Verbosity comes from the CLIFFMASK_LOG env var (error|warn|info|debug).
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("CLIFFMASK_LOG");
    if (env == nullptr) return LogLevel::kInfo;
    if (std::strcmp(env, "error") == 0) return LogLevel::kError;
    if (std::strcmp(env, "warn") == 0) return LogLevel::kWarn;
    if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

inline void log_line(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  static const char* const names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(level)],
               msg.c_str());
}

inline void log_error(const std::string& msg) {
  log_line(LogLevel::kError, msg);
}
inline void log_warn(const std::string& msg) { log_line(LogLevel::kWarn, msg); }
inline void log_info(const std::string& msg) { log_line(LogLevel::kInfo, msg); }
inline void log_debug(const std::string& msg) {
  log_line(LogLevel::kDebug, msg);
}

}  // namespace cliffmask

#endif  // CLIFFMASK_CORE_LOG_HPP
