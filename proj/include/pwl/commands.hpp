#pragma once

namespace pwl::cli {

/// Entry point of the `pwl` tool. Returns the process exit code: 0 success,
/// 2 validation error, 3 numeric abort, 4 I/O error.
int run(int argc, char** argv);

}  // namespace pwl::cli
