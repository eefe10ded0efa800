#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "kcorr/errors.hpp"

namespace kcorr::experiment {

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Shortest text that reads back to exactly x.
inline std::string shortest(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

/// Minimal RFC-4180 writer: header row, CRLF-free lines, 17 significant digits.
class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header) : os_(path) {
    if (!os_) throw StorageError("cannot write " + path.string());
    row(std::vector<std::string>(header));
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << csv_field(cells[i]);
    os_ << '\n';
  }

  ~CsvWriter() { os_.flush(); }

private:
  std::ofstream os_;
};

/// Splits one CSV line (quoted fields allowed).
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
      else if (c == '"') quoted = false;
      else cur += c;
    } else if (c == '"') quoted = true;
    else if (c == ',') out.push_back(cur), cur.clear();
    else cur += c;
  }
  out.push_back(cur);
  return out;
}

/// Reads a two-column numeric CSV (header skipped) into x and y.
inline void read_two_columns(const std::filesystem::path& path, std::vector<double>& x, std::vector<double>& y) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() < 2) throw StorageError("malformed row in " + path.string());
    x.push_back(std::stod(cells[0]));
    y.push_back(std::stod(cells[1]));
  }
}

} // namespace kcorr::experiment
