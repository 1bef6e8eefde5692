#pragma once

#include <string>

namespace bosonlc {

// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite
// values. Locale independent, so output files are byte-stable.
std::string format_double(double x);

}  // namespace bosonlc
