#pragma once

#include <iosfwd>

namespace spo {

/// Command-line entry point. Returns 0 on success, 1 on usage errors and
/// 2 when the analysis itself fails.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spo
