#pragma once

#include <iosfwd>

namespace splitlab::cli {

enum ExitCode { kOk = 0, kNotConverged = 1, kUsage = 2, kIo = 3 };

/// Runs one command line; writes reports to `out` and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace splitlab::cli
