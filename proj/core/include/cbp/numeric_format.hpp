#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cbp {

/// Decimal rendering with 17 significant digits; parses back to the same double.
std::string format_real(double value);

/// Strict parsers: the whole string must be consumed. Throw InvalidArgument.
double parse_real(std::string_view text);
std::int64_t parse_int(std::string_view text);

}  // namespace cbp
