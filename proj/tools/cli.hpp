#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace odeq {

// Command dispatch for the odeq tool, factored out of main() so tests can
// drive it with captured streams.  args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

} // namespace odeq
