#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bweb::cli {

// Exit codes: 0 ok, 1 failed checks (verify), 2 usage or configuration error,
// 3 window overflow.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bweb::cli
