#pragma once

#include <functional>
#include <string_view>

namespace svl {

enum class Severity { info, warning };

using LogSink = std::function<void(Severity, std::string_view)>;

// Replaces the process-wide sink and returns the previous one. The default
// sink writes warnings to std::clog and drops info messages.
LogSink set_log_sink(LogSink sink);

void log_message(Severity severity, std::string_view message);
inline void log_warning(std::string_view message) { log_message(Severity::warning, message); }
inline void log_info(std::string_view message) { log_message(Severity::info, message); }

}  // namespace svl
