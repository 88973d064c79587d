#pragma once

namespace ldiverted {

// Entry point behind the `ldiverted` binary; exposed so tests can drive the
// command surface in-process. Exit codes: 0 success, 2 usage error, 3 data
// error, 4 infeasible configuration.
int cli_main(int argc, const char* const* argv);

}  // namespace ldiverted
