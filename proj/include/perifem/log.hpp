#pragma once

#include <string>

namespace perifem {

enum class LogLevel { quiet = 0, warning = 1, info = 2, debug = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();

void log_warning(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

} // namespace perifem
