#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "svlaser/log.hpp"

// Many tests run deliberately under-resolved states; their warnings would bury
// the report. Tests that inspect messages install their own sink.
int main(int argc, char** argv) {
  svl::set_log_sink([](svl::Severity, std::string_view) {});
  doctest::Context context(argc, argv);
  return context.run();
}
