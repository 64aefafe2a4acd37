#pragma once

// Shared helpers for the line-oriented text formats.

#include <istream>
#include <map>
#include <string>

#include "hlgse/types.hpp"

namespace hlgse::detail {

/// Shortest-round-trip-safe rendering (17 significant digits).
std::string format_real(Real value);

/// Parses "k1=v1 k2=v2 ..." into a map; throws InvalidArgument on malformed
/// tokens.
std::map<std::string, std::string> parse_header(const std::string& line);

Real parse_real(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);

/// Reads the next line that is neither empty nor a '#' comment.
bool next_data_line(std::istream& in, std::string& line);

const std::string& require_key(const std::map<std::string, std::string>& header,
                               const std::string& key);

}  // namespace hlgse::detail
