#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nestdiag {

/// Runs one command line. args excludes the program name. Reports go to out,
/// diagnostics to err. Returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace nestdiag
