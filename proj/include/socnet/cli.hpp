#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace socnet {

// Exit codes: 0 success, 1 data / usage error, 2 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace socnet
