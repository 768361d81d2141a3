#pragma once

namespace pimrl {

// Entry point shared by the pimrl binary and the in-process CLI tests.
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 numeric divergence.
int run_cli(int argc, const char* const* argv);

}  // namespace pimrl
