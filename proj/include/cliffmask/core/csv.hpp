//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_CORE_CSV_HPP
#define CLIFFMASK_CORE_CSV_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cliffmask/core/error.hpp"

namespace cliffmask {

// Minimal RFC-4180-ish CSV: double-quoted fields may contain commas,
// newlines are record separators (no embedded newlines supported).
inline std::vector<std::string> csv_split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c == '\r') {
      // tolerate CRLF input
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string csv_quote(const std::string& field) {
  bool needs = false;
  for (char c : field) {
    if (c == ',' || c == '"' || c == '\n') {
      needs = true;
      break;
    }
  }
  if (!needs) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }

  int require_column(const std::string& name) const {
    int c = column(name);
    if (c < 0) raise(Errc::kMissingColumn, "missing CSV column: " + name);
    return c;
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::kIoError, "cannot open CSV file: " + path);
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    auto row = csv_split_row(line);
    if (first) {
      t.header = std::move(row);
      first = false;
    } else {
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

inline void write_csv_row(std::ostream& os,
                          const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ',';
    os << csv_quote(row[i]);
  }
  os << '\n';
}

inline void write_csv(const std::string& path, const CsvTable& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) raise(Errc::kIoError, "cannot write CSV file: " + path);
  write_csv_row(os, t.header);
  for (const auto& r : t.rows) write_csv_row(os, r);
}

}  // namespace cliffmask

#endif  // CLIFFMASK_CORE_CSV_HPP
