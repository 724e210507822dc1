// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gramformer::cli {

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Flat "key = value" text, one pair per line. Blank lines and lines starting
/// with '#' are ignored; whitespace around keys and values is trimmed.
/// Throws ParseError on a line without '=', an empty key, or a repeated key.
std::vector<KeyValue> parse_key_values(std::string_view text);

std::string format_key_values(const std::vector<std::pair<std::string, std::string>>& pairs);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

}  // namespace gramformer::cli
