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

#include "rps/config.hpp"

#include <algorithm>
#include <cmath>

#include "rps/error.hpp"
#include "rps/io.hpp"

namespace rps {

namespace {

bool is_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
}

std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    else if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string parse_string(std::string_view text) {
  if (text.size() < 2 || text.front() != '"' || text.back() != '"')
    fail(ErrorKind::kValidation, "unterminated string " + std::string(text));
  const auto body = text.substr(1, text.size() - 2);
  if (body.find('"') != std::string_view::npos) fail(ErrorKind::kValidation, "embedded quote in " + std::string(text));
  return std::string(body);
}

}  // namespace

ConfigValue parse_config_value(std::string_view text, bool allow_bare_word) {
  text = io::trim(text);
  if (text.empty()) fail(ErrorKind::kValidation, "missing value");
  if (text == "true") return true;
  if (text == "false") return false;
  if (text.front() == '"') return parse_string(text);
  if (text.front() == '[') {
    if (text.back() != ']') fail(ErrorKind::kValidation, "unterminated array " + std::string(text));
    const auto body = io::trim(text.substr(1, text.size() - 2));
    if (body.empty()) return std::vector<double>{};
    const auto items = io::split(body, ',');
    if (io::trim(items.front()).starts_with('"')) {
      std::vector<std::string> out;
      for (auto item : items) out.push_back(parse_string(io::trim(item)));
      return out;
    }
    std::vector<double> out;
    for (auto item : items) out.push_back(io::parse_double(item));
    return out;
  }
  try {
    return io::parse_double(text);
  } catch (const Error&) {
    if (!allow_bare_word) throw;
  }
  // CLI overrides accept comma-separated numbers and bare words.
  if (text.find(',') != std::string_view::npos) {
    std::vector<double> out;
    for (auto item : io::split(text, ',')) out.push_back(io::parse_double(item));
    return out;
  }
  return std::string(text);
}

ConfigDocument ConfigDocument::parse(std::string_view text) {
  ConfigDocument doc;
  std::size_t lineno = 0;
  for (auto raw : io::split(text, '\n')) {
    ++lineno;
    const auto line = io::trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::kValidation, "config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(io::trim(line.substr(0, eq)));
    if (key.empty() || !std::all_of(key.begin(), key.end(), is_key_char))
      fail(ErrorKind::kValidation, "config line " + std::to_string(lineno) + ": bad key '" + key + "'");
    if (doc.values_.count(key))
      fail(ErrorKind::kValidation, "config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    try {
      doc.values_[key] = parse_config_value(line.substr(eq + 1), false);
    } catch (const Error& e) {
      fail(ErrorKind::kValidation, "config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) { return parse(io::read_file(path)); }

void ConfigDocument::set(const std::string& key, std::string_view value) {
  values_[key] = parse_config_value(value, true);
}

std::optional<std::string> ConfigDocument::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  fail(ErrorKind::kValidation, "config key '" + key + "' must be a string");
}

std::optional<double> ConfigDocument::get_number(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* v = std::get_if<double>(&it->second)) return *v;
  fail(ErrorKind::kValidation, "config key '" + key + "' must be a number");
}

std::optional<long long> ConfigDocument::get_integer(const std::string& key) const {
  const auto v = get_number(key);
  if (!v) return std::nullopt;
  if (std::floor(*v) != *v || std::abs(*v) > 9.0e15)
    fail(ErrorKind::kValidation, "config key '" + key + "' must be an integer");
  return static_cast<long long>(*v);
}

std::optional<bool> ConfigDocument::get_bool(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* v = std::get_if<bool>(&it->second)) return *v;
  fail(ErrorKind::kValidation, "config key '" + key + "' must be true or false");
}

std::optional<std::vector<double>> ConfigDocument::get_numbers(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* v = std::get_if<std::vector<double>>(&it->second)) return *v;
  if (const auto* v = std::get_if<double>(&it->second)) return std::vector<double>{*v};
  fail(ErrorKind::kValidation, "config key '" + key + "' must be an array of numbers");
}

std::optional<std::vector<std::string>> ConfigDocument::get_strings(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* v = std::get_if<std::vector<std::string>>(&it->second)) return *v;
  if (const auto* v = std::get_if<std::string>(&it->second)) return std::vector<std::string>{*v};
  if (const auto* v = std::get_if<std::vector<double>>(&it->second); v && v->empty()) return std::vector<std::string>{};
  fail(ErrorKind::kValidation, "config key '" + key + "' must be an array of strings");
}

std::string ConfigDocument::to_text() const {
  std::string out;
  for (const auto& [key, value] : values_) {
    out += key + " = ";
    std::visit(
        [&out](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::string>) {
            out += '"' + v + '"';
          } else if constexpr (std::is_same_v<T, double>) {
            out += io::format_double(v);
          } else if constexpr (std::is_same_v<T, bool>) {
            out += v ? "true" : "false";
          } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            out += '[';
            for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + io::format_double(v[i]);
            out += ']';
          } else {
            out += '[';
            for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", \"" : "\"") + v[i] + '"';
            out += ']';
          }
        },
        value);
    out += '\n';
  }
  return out;
}

}  // namespace rps
