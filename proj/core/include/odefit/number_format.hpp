#pragma once

#include <string>

namespace odefit {

/// Shortest decimal form that parses back to exactly the same double.
/// NaN prints as "nan", infinities as "inf" / "-inf".
std::string format_double(double value);

}  // namespace odefit
