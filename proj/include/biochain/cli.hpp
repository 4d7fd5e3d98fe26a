#pragma once

namespace biochain::cli {

// Parses argv and dispatches to the subcommands. Exit codes: 0 optimal or
// clean, 1 validation findings, 2 infeasible, 3 time limit, 4 input error,
// 5 internal numerical error.
int run(int argc, char** argv);

}  // namespace biochain::cli
