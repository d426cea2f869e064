#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace glossmap::cli {

/// Entry point shared by the `glossmap` binary and the tests. Returns the
/// process exit code: 0 success, 2 validation, 3 I/O, 4 numeric.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace glossmap::cli
