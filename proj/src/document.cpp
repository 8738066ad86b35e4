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

#include "cavread/document.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <set>

namespace cavread {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string where(const DocumentEntry& entry) {
  return "'" + entry.key + "' (line " + std::to_string(entry.line) + ")";
}

}  // namespace

ConfigError::ConfigError(const std::string& message, std::size_t line)
    : std::runtime_error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
      line_(line) {}

const DocumentEntry* DocumentSection::find(std::string_view key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

void DocumentSection::set(std::string key, std::string value) {
  for (auto& e : entries) {
    if (e.key == key) {
      e.value = std::move(value);
      return;
    }
  }
  entries.push_back({std::move(key), std::move(value), 0});
}

DocumentSection& Document::add_section(std::string name) {
  sections.push_back({std::move(name), 0, {}});
  return sections.back();
}

Document Document::parse(std::string_view text) {
  Document doc;
  doc.sections.push_back({"", 0, {}});
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("malformed section header", line_no);
      }
      doc.sections.push_back({std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
      seen.clear();
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
      std::string key(trim(line.substr(0, eq)));
      std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) throw ConfigError("empty key", line_no);
      if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line_no);
      doc.sections.back().entries.push_back({std::move(key), std::move(value), line_no});
    }
    if (end == text.size()) break;
  }
  if (doc.sections.front().entries.empty()) doc.sections.erase(doc.sections.begin());
  return doc;
}

std::string Document::render() const {
  std::string out;
  bool first = true;
  for (const auto& section : sections) {
    if (!section.name.empty()) {
      if (!first) out += '\n';
      out += "[" + section.name + "]\n";
    }
    for (const auto& e : section.entries) out += e.key + " = " + e.value + "\n";
    first = false;
  }
  return out;
}

double parse_double(const DocumentEntry& entry) {
  const char* begin = entry.value.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw ConfigError("expected a number for " + where(entry), entry.line);
  }
  return v;
}

long long parse_integer(const DocumentEntry& entry) {
  const char* begin = entry.value.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw ConfigError("expected an integer for " + where(entry), entry.line);
  }
  return v;
}

bool parse_bool(const DocumentEntry& entry) {
  if (entry.value == "true" || entry.value == "1") return true;
  if (entry.value == "false" || entry.value == "0") return false;
  throw ConfigError("expected true/false for " + where(entry), entry.line);
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

}  // namespace cavread
