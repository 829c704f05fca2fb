#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace deckmotion::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIoError = 2,
  kDiverged = 3,
  kBadInput = 4,
};

/// Runs one invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace deckmotion::cli
