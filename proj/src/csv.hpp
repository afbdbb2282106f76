#pragma once

#include <istream>
#include <string>
#include <vector>

namespace mapfilt::csv {

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_record(const std::string& line);

/// Reads the next non-empty line, stripping a trailing '\r' and a leading
/// UTF-8 byte order mark. Returns false at end of input.
bool next_line(std::istream& in, std::string& line);

std::string trim(const std::string& s);
std::string lower(std::string s);
/// Quotes a field when it contains a comma, quote or newline.
std::string quote(const std::string& field);

/// Parses a number, tolerating surrounding whitespace and thousands
/// separators. Returns false when the text is not numeric.
bool parse_number(const std::string& text, double& out);

}  // namespace mapfilt::csv
