// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sarc::detail {

struct CsvRecord {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and raw
// newlines. CRLF record terminators are accepted; bytes inside quotes are kept
// verbatim. Throws InputError on an unterminated quote.
std::vector<CsvRecord> parse_csv(std::string_view text);

}  // namespace sarc::detail
