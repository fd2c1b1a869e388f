#pragma once

#include <string>

namespace momrec {

enum class LogLevel { error = 0, info = 1, debug = 2 };

/// Current level, parsed once from the MOMREC_LOG environment variable
/// (error | info | debug; default error).
LogLevel log_level();

void log(LogLevel level, const std::string& message);

inline void log_info(const std::string& m) { log(LogLevel::info, m); }
inline void log_debug(const std::string& m) { log(LogLevel::debug, m); }
inline void log_error(const std::string& m) { log(LogLevel::error, m); }

} // namespace momrec
