#include "momrec/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace momrec {

namespace {

LogLevel parse_level() {
    const char* env = std::getenv("MOMREC_LOG");
    if (!env)
        return LogLevel::error;
    const std::string v(env);
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    return LogLevel::error;
}

std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

LogLevel log_level() {
    static const LogLevel level = parse_level();
    return level;
}

void log(LogLevel level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(log_level()))
        return;
    const char* tag = level == LogLevel::error ? "error"
                    : level == LogLevel::info  ? "info"
                                               : "debug";
    std::lock_guard<std::mutex> lock(log_mutex());
    std::cerr << "[momrec:" << tag << "] " << message << "\n";
}

} // namespace momrec
