#pragma once

#include <iosfwd>

namespace sl {

/// Entry point behind the `sl` binary, split out so tests can drive it with
/// captured streams. Program output goes to `out`, diagnostics to `err`.
/// Returns 0 on success, 1 on program errors, 2 on usage errors.
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace sl
