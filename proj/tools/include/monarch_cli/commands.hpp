#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace monarch::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitPredicateFalse = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitAssumption = 4,
};

/// Full command line including the program name in argv[0].
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Arguments after the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace monarch::cli
