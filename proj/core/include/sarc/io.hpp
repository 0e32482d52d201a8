// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sarc {

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place, so a
/// crash never leaves a truncated artifact at `path`. Parent directories are
/// created as needed.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace sarc
