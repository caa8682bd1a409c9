#include "perifem/log.hpp"

#include <atomic>
#include <iostream>

namespace perifem {

namespace {
std::atomic<LogLevel> g_level{LogLevel::warning};
}

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log_warning(const std::string& msg)
{
    if (g_level >= LogLevel::warning)
        std::cerr << "warning: " << msg << '\n';
}

void log_info(const std::string& msg)
{
    if (g_level >= LogLevel::info)
        std::cerr << msg << '\n';
}

void log_debug(const std::string& msg)
{
    if (g_level >= LogLevel::debug)
        std::cerr << "debug: " << msg << '\n';
}

} // namespace perifem
