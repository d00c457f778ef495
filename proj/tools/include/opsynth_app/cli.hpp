#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace opsynth::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitNumerical = 3,  // numerical, conditioning, cutoff, unmeasurable element
  kExitTolerance = 4,
};

/// Entry point of the `opsynth` tool. `args` excludes the program name.
/// Results go to `out`; errors go to `err` as {"error": class, "message": text}.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace opsynth::app
