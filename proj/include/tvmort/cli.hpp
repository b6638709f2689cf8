#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tvmort::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage, configuration or
/// missing-input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tvmort::cli
