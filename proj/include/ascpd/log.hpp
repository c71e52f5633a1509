#pragma once

#include <string_view>

namespace ascpd::log {

// Warnings go to stderr unless silenced. The flag is process-wide.
void set_quiet(bool quiet);
bool quiet();
void warn(std::string_view message);

}  // namespace ascpd::log
