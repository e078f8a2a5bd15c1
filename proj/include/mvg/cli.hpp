#pragma once

namespace mvg::cli {

// Exit codes: 0 ok, 2 usage, 3 precondition/hash failure, 4 numerical failure.
int run(int argc, char** argv);

} // namespace mvg::cli
