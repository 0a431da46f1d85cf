#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mvne::cli {

enum ExitCode : int { ok = 0, usage_error = 2, data_error = 3, numerical_failure = 4 };

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// The six model variants in the row order of the ablation table.
std::vector<std::string> table3_variant_names();

}  // namespace mvne::cli
