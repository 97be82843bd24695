#pragma once

#include <iosfwd>

namespace gtab::cli {

/// Exit codes: 0 success, 1 internal failure, 2 invalid input.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gtab::cli
