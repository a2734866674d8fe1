#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lensrig {

// Exit codes: 0 pass, 1 verification failure or runtime error, 2 usage or config error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace lensrig
