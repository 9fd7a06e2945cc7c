#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scsqkd/errors.hpp"

namespace scsqkd {

// Plain-text structured document: a `schema = ...` tag followed by named
// sections of key/value pairs. All dataset, report, calibration and scenario
// files share this carrier. Key order is preserved so serialization is
// byte-stable.
//
//   # optional comment
//   schema = scsqkd/dataset v1
//
//   [params]
//   n_windows = 363000000000
//   p_send = 0.2
class Document {
 public:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
  };

  static Document parse(std::string_view text) {
    Document doc;
    Section* current = nullptr;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t eol = text.find('\n', pos);
      std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                             : eol - pos);
      pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
      ++line_no;
      line = trim(line);
      if (line.empty() || line.front() == '#') continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw parse_error("document line " + std::to_string(line_no) + ": unterminated section");
        doc.sections_.push_back({std::string(trim(line.substr(1, line.size() - 2))), {}});
        current = &doc.sections_.back();
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos)
        throw parse_error("document line " + std::to_string(line_no) + ": expected key = value");
      std::string key(trim(line.substr(0, eq)));
      std::string value(trim(line.substr(eq + 1)));
      if (key.empty())
        throw parse_error("document line " + std::to_string(line_no) + ": empty key");
      if (current == nullptr) {
        if (key == "schema")
          doc.schema_ = std::move(value);
        else
          throw parse_error("document line " + std::to_string(line_no) +
                            ": key outside any section: " + key);
      } else {
        current->entries.emplace_back(std::move(key), std::move(value));
      }
    }
    return doc;
  }

  static Document load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  const std::string& schema() const { return schema_; }
  void set_schema(std::string s) { schema_ = std::move(s); }

  void require_schema(std::string_view expected) const {
    if (schema_ != expected)
      throw parse_error("unexpected schema tag '" + schema_ + "', expected '" +
                        std::string(expected) + "'");
  }

  bool has(std::string_view section, std::string_view key) const {
    return find(section, key) != nullptr;
  }

  std::string_view get_str(std::string_view section, std::string_view key) const {
    const std::string* v = find(section, key);
    if (v == nullptr)
      throw parse_error("missing key [" + std::string(section) + "] " + std::string(key));
    return *v;
  }

  double get_num(std::string_view section, std::string_view key) const {
    const std::string_view raw = get_str(section, key);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (ec != std::errc{} || ptr != raw.data() + raw.size())
      throw parse_error("key [" + std::string(section) + "] " + std::string(key) +
                        ": not a number: '" + std::string(raw) + "'");
    return value;
  }

  std::uint64_t get_count(std::string_view section, std::string_view key) const {
    const std::string_view raw = get_str(section, key);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (ec == std::errc{} && ptr == raw.data() + raw.size()) return value;
    // Accept integral scientific notation (e.g. 3.63e11) for convenience.
    const double as_double = get_num(section, key);
    if (as_double < 0.0 || as_double > 9.007199254740992e15 ||
        as_double != std::floor(as_double))
      throw parse_error("key [" + std::string(section) + "] " + std::string(key) +
                        ": not a non-negative integer count: '" + std::string(raw) + "'");
    return static_cast<std::uint64_t>(as_double);
  }

  double get_num_or(std::string_view section, std::string_view key, double fallback) const {
    return has(section, key) ? get_num(section, key) : fallback;
  }

  Section& section(std::string_view name) {
    for (auto& s : sections_)
      if (s.name == name) return s;
    sections_.push_back({std::string(name), {}});
    return sections_.back();
  }

  void set_str(std::string_view sec, std::string_view key, std::string_view value) {
    auto& entries = section(sec).entries;
    for (auto& [k, v] : entries)
      if (k == key) {
        v = std::string(value);
        return;
      }
    entries.emplace_back(std::string(key), std::string(value));
  }

  void set_num(std::string_view sec, std::string_view key, double value) {
    set_str(sec, key, format_number(value));
  }

  void set_count(std::string_view sec, std::string_view key, std::uint64_t value) {
    set_str(sec, key, std::to_string(value));
  }

  // Shortest representation that round-trips exactly.
  static std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, ptr);
  }

  std::string serialize() const {
    std::string out;
    out += "schema = " + schema_ + "\n";
    for (const auto& s : sections_) {
      out += "\n[" + s.name + "]\n";
      for (const auto& [k, v] : s.entries) out += k + " = " + v + "\n";
    }
    return out;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot write " + path.string());
    out << serialize();
  }

  const std::vector<Section>& sections() const { return sections_; }

 private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
      s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
      s.remove_suffix(1);
    return s;
  }

  const std::string* find(std::string_view section, std::string_view key) const {
    for (const auto& s : sections_)
      if (s.name == section)
        for (const auto& [k, v] : s.entries)
          if (k == key) return &v;
    return nullptr;
  }

  std::string schema_;
  std::vector<Section> sections_;
};

}  // namespace scsqkd
