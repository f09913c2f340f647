#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcdl::cli {

enum ExitCode : int { ok = 0, usage = 1, data = 2, numerical = 3 };

/// Runs one `mcdl` invocation. `args` excludes the program name. Results go
/// to `out`, diagnostics and progress to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcdl::cli
