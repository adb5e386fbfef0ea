#pragma once

#include <string>

namespace dqa {

// Shortest round-trip decimal text for a double; infinities print as
// `inf` / `-inf` and NaN as `nan`. Output is locale independent.
std::string format_double(double value);

// Parses text produced by format_double (plus ordinary decimal forms).
// Throws std::invalid_argument on malformed input.
double parse_double(const std::string& text);

}  // namespace dqa

#include <vector>

namespace dqa {

// Splits one CSV record on commas and trims surrounding whitespace. No
// quoting support; none of the formats here need it.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace dqa
