#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bed::cli {

/// Exit codes: 0 success, 1 numerical failure, 2 usage or input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "0,-1,-2" or ranges "0..1:0.1" (inclusive), mixed freely.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace bed::cli
