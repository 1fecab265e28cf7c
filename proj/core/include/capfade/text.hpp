#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace capfade::text {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

std::string_view trim(std::string_view s);

/// Splits on `sep` without quoting support; fields are trimmed.
std::vector<std::string_view> split(std::string_view line, char sep = ',');

bool parse_int(std::string_view s, int& out);
bool parse_double(std::string_view s, double& out);

}  // namespace capfade::text
