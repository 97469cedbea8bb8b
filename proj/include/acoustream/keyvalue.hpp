#pragma once

// Line-oriented "key = value" text with optional [section] headers.
// Used by material files and scenario files.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace acoustream {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_number(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

}  // namespace detail

struct KvEntry {
  std::string value;
  int line = 0;
};

class KvSection {
 public:
  KvSection() = default;
  KvSection(std::string name, int line) : name_(std::move(name)), line_(line) {}

  const std::string& name() const { return name_; }
  int line() const { return line_; }
  bool empty() const { return entries_.empty(); }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, KvEntry>& entries() const { return entries_; }

  void insert(const std::string& key, KvEntry e) {
    if (has(key))
      throw SchemaError("duplicate key '" + key + "' in [" + name_ + "]", e.line);
    entries_.emplace(key, std::move(e));
  }

  const KvEntry& entry(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
      throw SchemaError("missing key '" + key + "' in [" + name_ + "]", line_);
    return it->second;
  }

  std::string get_string(const std::string& key) const { return entry(key).value; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  double get_double(const std::string& key) const {
    const auto& e = entry(key);
    auto v = detail::parse_number(e.value);
    if (!v || !std::isfinite(*v))
      throw SchemaError("key '" + key + "' expects a finite number, got '" + e.value + "'", e.line);
    return *v;
  }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  std::optional<double> find_double(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return get_double(key);
  }

  long get_int(const std::string& key) const {
    const auto& e = entry(key);
    auto v = detail::parse_number(e.value);
    if (!v || std::floor(*v) != *v || std::abs(*v) > 1e15)
      throw SchemaError("key '" + key + "' expects an integer, got '" + e.value + "'", e.line);
    return static_cast<long>(*v);
  }

  long get_int(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& e = entry(key);
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    throw SchemaError("key '" + key + "' expects true/false, got '" + e.value + "'", e.line);
  }

  // Comma separated numbers.
  std::vector<double> get_list(const std::string& key) const {
    const auto& e = entry(key);
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto v = detail::parse_number(item);
      if (!v || !std::isfinite(*v))
        throw SchemaError("key '" + key + "' has a bad list item '" + detail::trim(item) + "'",
                          e.line);
      out.push_back(*v);
    }
    if (out.empty()) throw SchemaError("key '" + key + "' has an empty list", e.line);
    return out;
  }

  // Throws on any key outside `allowed`.
  void expect_only(const std::vector<std::string>& allowed) const {
    for (const auto& [k, e] : entries_) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
        throw SchemaError("unknown key '" + k + "' in [" + name_ + "]", e.line);
    }
  }

 private:
  std::string name_;
  int line_ = 0;
  std::map<std::string, KvEntry> entries_;
};

class KvDocument {
 public:
  static KvDocument parse(const std::string& text) {
    KvDocument doc;
    doc.sections_.emplace_back("", 0);
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      std::string line = raw;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw SchemaError("unterminated section header", lineno);
        std::string name = detail::trim(line.substr(1, line.size() - 2));
        if (name.empty()) throw SchemaError("empty section name", lineno);
        for (const auto& s : doc.sections_)
          if (s.name() == name) throw SchemaError("duplicate section [" + name + "]", lineno);
        doc.sections_.emplace_back(name, lineno);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw SchemaError("expected 'key = value'", lineno);
      std::string key = detail::trim(line.substr(0, eq));
      std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty()) throw SchemaError("empty key", lineno);
      doc.sections_.back().insert(key, KvEntry{value, lineno});
    }
    return doc;
  }

  static KvDocument load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  bool has_section(const std::string& name) const {
    for (const auto& s : sections_)
      if (s.name() == name) return true;
    return false;
  }

  const KvSection& section(const std::string& name) const {
    for (const auto& s : sections_)
      if (s.name() == name) return s;
    throw SchemaError("missing section [" + name + "]");
  }

  // Empty section when absent, so optional blocks read uniformly.
  const KvSection& section_or_empty(const std::string& name) const {
    static const KvSection empty_section;
    for (const auto& s : sections_)
      if (s.name() == name) return s;
    return empty_section;
  }

  const std::vector<KvSection>& sections() const { return sections_; }

  bool empty() const {
    for (const auto& s : sections_)
      if (!s.empty() || !s.name().empty()) return false;
    return true;
  }

 private:
  std::vector<KvSection> sections_;
};

}  // namespace acoustream
