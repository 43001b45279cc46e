#pragma once

#include <iosfwd>

namespace mctl {

/// Entry point of the `mctl` command line tool. Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mctl
