#include <fmt/core.h>

#include <cstdio>

#include "admission/session.hpp"

auto main(int argc, char** argv) -> int {
   if (argc != 2) {
      fmt::print(stderr, "usage: {} <config-file>\n", argc > 0 ? argv[0] : "admission");
      return static_cast<int>(admission::ExitCode::ConfigError);
   }
   const admission::SessionOutcome outcome = admission::run_session(argv[1]);
   if (!outcome.report.empty()) {
      fmt::print("{}", outcome.report);
   }
   if (!outcome.error.empty()) {
      fmt::print(stderr, "{}\n", outcome.error);
   }
   return static_cast<int>(outcome.exit_code);
}
