#pragma once

namespace dispersia {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

/// Verbosity from DISPERSIA_LOG ("quiet", "info", "debug" or 0..2), read once.
LogLevel log_level();

/// printf-style diagnostics on stderr. Never used for results.
void log_info(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void log_debug(const char* fmt, ...) __attribute__((format(printf, 1, 2)));

}  // namespace dispersia
