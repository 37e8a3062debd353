// Copyright 2026 The rps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rps::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
/// Strict full-string parse; throws Error(kValidation) on garbage.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text) noexcept;

/// Writes to `<path>.tmp` and renames over `path`, creating parent
/// directories as needed.
void write_file_atomic(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

}  // namespace rps::io
