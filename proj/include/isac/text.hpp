#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace isac {

/// Shortest decimal form that round-trips the exact double value.
std::string fmt(double v);

/// Fixed-point form with the given number of decimals (plot coordinates).
std::string fmt_fixed(double v, int decimals);

/// Strict double parse; throws std::invalid_argument on trailing garbage.
double parse_double(std::string_view s);

/// Strict integer parse.
long long parse_int(std::string_view s);

/// Trims ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

/// Splits on a delimiter, trimming each piece; empty pieces are dropped.
std::vector<std::string> split_list(std::string_view s, char delim);

}  // namespace isac
