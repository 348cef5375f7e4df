#include "svlaser/log.hpp"

#include <iostream>
#include <mutex>

namespace svl {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

LogSink& current_sink() {
  static LogSink sink = [](Severity severity, std::string_view message) {
    if (severity == Severity::warning) std::clog << "warning: " << message << '\n';
  };
  return sink;
}

}  // namespace

LogSink set_log_sink(LogSink sink) {
  std::lock_guard lock(sink_mutex());
  LogSink previous = std::move(current_sink());
  current_sink() = std::move(sink);
  return previous;
}

void log_message(Severity severity, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) current_sink()(severity, message);
}

}  // namespace svl
