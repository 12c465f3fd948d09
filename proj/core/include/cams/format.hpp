#pragma once

#include <string>
#include <string_view>

namespace cams {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Strict full-string parse (surrounding blanks allowed); `ok` reports success.
double parse_double(std::string_view text, bool& ok);

} // namespace cams
