#pragma once

#include <iosfwd>

namespace opmm {

// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,
    kExitInvalidArgument = 2,
    kExitEmptyPipeline = 3,
};

// Entry point of the `opmm` tool. Subcommands: simulate, detect, estimate, bench.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace opmm
