#pragma once

#include <ostream>

namespace lidardrive::evalharness {

/// The `lidardrive` command line: gen-data, train, eval-offline, drive and
/// project, with the global flags --config, --seed and --out-dir. Returns
/// the process exit status (0 success, 1 runtime or schema error, 2 usage).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lidardrive::evalharness
