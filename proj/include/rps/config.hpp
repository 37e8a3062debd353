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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rps {

/// Value of one `key = value` line: a quoted string, a number, a boolean or
/// a bracketed array of numbers or strings.
using ConfigValue = std::variant<std::string, double, bool, std::vector<double>, std::vector<std::string>>;

/// Flat key-value document in TOML-like syntax:
///
///     # comment
///     noise = "laplace"
///     n = 250
///     theta_star = [5, 1]
///     baselines = ["sps", "eoa"]
///
/// Keys are unique; there are no tables. Throws Error(kValidation) with the
/// offending line number on syntax errors.
class ConfigDocument {
 public:
  static ConfigDocument parse(std::string_view text);
  static ConfigDocument load(const std::string& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, ConfigValue>& values() const noexcept { return values_; }

  /// Replaces or inserts `key`, parsing `value` with the file syntax (bare
  /// words are taken as strings).
  void set(const std::string& key, std::string_view value);
  void erase(const std::string& key) { values_.erase(key); }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_number(const std::string& key) const;
  std::optional<long long> get_integer(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<double>> get_numbers(const std::string& key) const;
  std::optional<std::vector<std::string>> get_strings(const std::string& key) const;

  /// Canonical text: keys sorted, numbers in shortest round-trip form.
  std::string to_text() const;

 private:
  std::map<std::string, ConfigValue> values_;
};

ConfigValue parse_config_value(std::string_view text, bool allow_bare_word);

}  // namespace rps
