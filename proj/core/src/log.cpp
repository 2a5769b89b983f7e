#include "tsso/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace tsso {

namespace {

LogLevel level_from_env() {
  const char* env = std::getenv("TSSO_DTR_LOG");
  if (!env) return LogLevel::Warn;
  if (std::strcmp(env, "off") == 0) return LogLevel::Off;
  if (std::strcmp(env, "error") == 0) return LogLevel::Error;
  if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
  if (std::strcmp(env, "info") == 0) return LogLevel::Info;
  if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
  return LogLevel::Warn;
}

std::atomic<int> g_level{-1};  // -1: not yet read from the environment

const char* tag(LogLevel lv) {
  switch (lv) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn: return "warn";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
    default: return "?";
  }
}

}  // namespace

LogLevel log_level() {
  int lv = g_level.load(std::memory_order_relaxed);
  if (lv < 0) {
    lv = static_cast<int>(level_from_env());
    g_level.store(lv, std::memory_order_relaxed);
  }
  return static_cast<LogLevel>(lv);
}

void set_log_level(LogLevel lv) {
  g_level.store(static_cast<int>(lv), std::memory_order_relaxed);
}

void log_message(LogLevel lv, const std::string& msg) {
  if (static_cast<int>(lv) > static_cast<int>(log_level())) return;
  std::fprintf(stderr, "[tsso-dtr %s] %s\n", tag(lv), msg.c_str());
}

}  // namespace tsso
