#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ctscheme::cli {

/// Runs one command line (without the program name).  Exit codes: 0 success,
/// 1 usage or parse error, 2 resource cap exceeded, 3 invariant violation.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ctscheme::cli
