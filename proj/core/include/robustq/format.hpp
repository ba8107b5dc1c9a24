#pragma once

#include <string>

namespace robustq {

/// printf("%.17g"); exact round trip for doubles, locale independent.
std::string format_double(double value);

}  // namespace robustq
