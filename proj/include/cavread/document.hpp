// Copyright 2026 The cavread Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cavread {

/// Raised for malformed documents and invalid configurations. Carries the
/// 1-based source line when one is known (0 otherwise).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct DocumentEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct DocumentSection {
  std::string name;
  std::size_t line = 0;
  std::vector<DocumentEntry> entries;

  const DocumentEntry* find(std::string_view key) const;
  void set(std::string key, std::string value);
};

/// Flat sectioned key-value text:
///
///   # comment
///   [section]
///   key = value
///
/// Keys before the first header belong to an unnamed section. Sections may
/// repeat; duplicate keys within one section are rejected.
struct Document {
  std::vector<DocumentSection> sections;

  static Document parse(std::string_view text);
  std::string render() const;

  DocumentSection& add_section(std::string name);
};

double parse_double(const DocumentEntry& entry);
long long parse_integer(const DocumentEntry& entry);
bool parse_bool(const DocumentEntry& entry);

/// printf("%.9g") formatting used for every emitted number.
std::string format_number(double value);

}  // namespace cavread
