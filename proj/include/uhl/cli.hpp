#pragma once

#include <iosfwd>

namespace uhl {

// Full command line driver. Returns the process exit code: 0 on success, 1
// when a validation run reports failures, 2 on invalid input, 3 on numerical
// failure. All text lands on the given streams.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace uhl
