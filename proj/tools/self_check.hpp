#pragma once

#include <ostream>

namespace odefit::cli {

/// Fast oracle and invariant checks; prints one line per check and returns
/// true when all pass.
bool run_self_checks(std::ostream& out);

}  // namespace odefit::cli
