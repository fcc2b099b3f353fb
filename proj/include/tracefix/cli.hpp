#pragma once

#include <ostream>

namespace tracefix::cli {

// Entry point for the `tracefix` executable. Returns the process exit code:
// 0 success, 1 usage/config error, 2 data error, 3 numeric failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tracefix::cli
