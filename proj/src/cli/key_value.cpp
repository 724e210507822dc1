// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/cli/key_value.hpp"

#include <charconv>
#include <set>

#include "gramformer/numerics/errors.hpp"

namespace gramformer::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::string_view text) {
  std::vector<KeyValue> out;
  std::set<std::string, std::less<>> seen;
  std::size_t pos = 0;
  std::size_t line = 0;
  while (pos < text.size()) {
    ++line;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::size_t offset = pos;
    const std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    const std::string_view row = trim(raw);
    if (row.empty() || row.front() == '#') continue;
    const std::size_t eq = row.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line, offset);
    const std::string key(trim(row.substr(0, eq)));
    if (key.empty()) throw ParseError("empty key", line, offset);
    if (!seen.insert(key).second) throw ParseError("duplicate key '" + key + "'", line, offset);
    out.push_back({key, std::string(trim(row.substr(eq + 1))), line});
  }
  return out;
}

std::string format_key_values(const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::string out;
  for (const auto& [k, v] : pairs) out += k + " = " + v + "\n";
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

}  // namespace gramformer::cli
