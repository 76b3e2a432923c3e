#include "dispersia/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <string>

namespace dispersia {

namespace {

LogLevel parse_level() {
  const char* env = std::getenv("DISPERSIA_LOG");
  if (env == nullptr) return LogLevel::quiet;
  const std::string v(env);
  if (v == "debug" || v == "2") return LogLevel::debug;
  if (v == "info" || v == "1") return LogLevel::info;
  return LogLevel::quiet;
}

std::mutex log_mutex;

void vlog(const char* tag, const char* fmt, std::va_list ap) {
  std::lock_guard<std::mutex> lock(log_mutex);
  std::fprintf(stderr, "[dispersia %s] ", tag);
  std::vfprintf(stderr, fmt, ap);
  std::fputc('\n', stderr);
}

}  // namespace

LogLevel log_level() {
  static const LogLevel level = parse_level();
  return level;
}

void log_info(const char* fmt, ...) {
  if (log_level() < LogLevel::info) return;
  std::va_list ap;
  va_start(ap, fmt);
  vlog("info", fmt, ap);
  va_end(ap);
}

void log_debug(const char* fmt, ...) {
  if (log_level() < LogLevel::debug) return;
  std::va_list ap;
  va_start(ap, fmt);
  vlog("debug", fmt, ap);
  va_end(ap);
}

}  // namespace dispersia
