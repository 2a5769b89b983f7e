#pragma once

#include <string>

namespace tsso {

enum class LogLevel { Off = 0, Error = 1, Warn = 2, Info = 3, Debug = 4 };

// Verbosity comes from the TSSO_DTR_LOG environment variable
// (off|error|warn|info|debug), default warn. Messages go to stderr so they
// never contaminate CSV/stdout output.
LogLevel log_level();
void set_log_level(LogLevel lv);

void log_message(LogLevel lv, const std::string& msg);

inline void log_error(const std::string& msg) { log_message(LogLevel::Error, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::Warn, msg); }
inline void log_info(const std::string& msg) { log_message(LogLevel::Info, msg); }
inline void log_debug(const std::string& msg) { log_message(LogLevel::Debug, msg); }

}  // namespace tsso
