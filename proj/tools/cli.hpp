// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>

namespace zedsim::cli {

/// Exit codes: 0 success, 1 invalid config or input, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace zedsim::cli
