#include "text_format.hpp"

#include <charconv>
#include <cstdio>
#include <system_error>
#include <sstream>

namespace hlgse::detail {

std::string format_real(Real value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::map<std::string, std::string> parse_header(const std::string& line) {
  std::map<std::string, std::string> out;
  std::istringstream in(line);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == token.size()) {
      throw InvalidArgument("malformed header token '" + token + "'");
    }
    out[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return out;
}

Real parse_real(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw InvalidArgument("cannot parse " + what + " from '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& text, const std::string& what) {
  long long v = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw InvalidArgument("cannot parse " + what + " from '" + text + "'");
  }
  return v;
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  return false;
}

const std::string& require_key(const std::map<std::string, std::string>& header,
                               const std::string& key) {
  const auto it = header.find(key);
  if (it == header.end()) throw InvalidArgument("header is missing '" + key + "'");
  return it->second;
}

}  // namespace hlgse::detail
