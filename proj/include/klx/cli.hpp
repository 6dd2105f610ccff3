#pragma once

#include <string>
#include <vector>

namespace klx::cli {

/// Exit codes: 0 success, 1 usage/config error, 2 estimator insufficiency.
int run(const std::vector<std::string>& args);

}  // namespace klx::cli
