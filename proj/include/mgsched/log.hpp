// SPDX-License-Identifier: Apache-2.0
#pragma once

// Minimal leveled logger for the batch pipeline. Verbosity comes from the
// SCHEDULER_LOG environment variable: off, error, warn (default), info,
// debug. Output goes to stderr so report files stay clean.

#include <cstdlib>
#include <iostream>
#include <string>

namespace mgsched {

enum class LogLevel : int { Off = 0, Error = 1, Warn = 2, Info = 3, Debug = 4 };

inline LogLevel log_threshold() {
    static const LogLevel level = [] {
        const char* raw = std::getenv("SCHEDULER_LOG");
        if (raw == nullptr) return LogLevel::Warn;
        const std::string v(raw);
        if (v == "off") return LogLevel::Off;
        if (v == "error") return LogLevel::Error;
        if (v == "warn") return LogLevel::Warn;
        if (v == "info") return LogLevel::Info;
        if (v == "debug") return LogLevel::Debug;
        return LogLevel::Warn;
    }();
    return level;
}

inline void log_line(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) > static_cast<int>(log_threshold())) return;
    const char* tag = level == LogLevel::Error  ? "error"
                      : level == LogLevel::Warn ? "warn"
                      : level == LogLevel::Info ? "info"
                                                : "debug";
    std::cerr << "[" << tag << "] " << msg << "\n";
}

inline void log_error(const std::string& msg) { log_line(LogLevel::Error, msg); }
inline void log_warn(const std::string& msg) { log_line(LogLevel::Warn, msg); }
inline void log_info(const std::string& msg) { log_line(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log_line(LogLevel::Debug, msg); }

}  // namespace mgsched
