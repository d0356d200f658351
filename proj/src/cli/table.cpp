// Copyright 2026 The quicscatter Authors
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

#include "quicscatter/cli/table.hpp"

#include <cstdio>
#include <fstream>

#include "quicscatter/common/error.hpp"
#include "quicscatter/common/text.hpp"

namespace quicscatter::cli {

std::string_view extension(TableFormat format) { return format == TableFormat::Tsv ? ".tsv" : ".jsonl"; }

TableFormat format_of(const std::filesystem::path& path) {
  return path.extension() == ".jsonl" ? TableFormat::Jsonl : TableFormat::Tsv;
}

std::string format_double(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  return buf;
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns_.size()) fail(Errc::InvalidConfig, "row width does not match table columns");
  rows_.push_back(std::move(row));
}

namespace {

std::string tsv_cell(const Cell& c) {
  if (c.is_null()) return "undefined";
  if (c.is_string()) return c.get<std::string>();
  if (c.is_boolean()) return c.get<bool>() ? "true" : "false";
  if (c.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", c.get<double>());
    return buf;
  }
  return c.dump();
}

}  // namespace

std::string Table::render(TableFormat format) const {
  std::string out;
  if (format == TableFormat::Tsv) {
    for (size_t i = 0; i < columns_.size(); ++i) out += (i ? "\t" : "") + columns_[i];
    out += '\n';
    for (const auto& row : rows_) {
      for (size_t i = 0; i < row.size(); ++i) out += (i ? "\t" : "") + tsv_cell(row[i]);
      out += '\n';
    }
    return out;
  }
  for (const auto& row : rows_) {
    Cell obj = Cell::object();
    for (size_t i = 0; i < row.size(); ++i) obj[columns_[i]] = row[i];
    out += obj.dump() + '\n';
  }
  return out;
}

std::vector<Record> read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::UnreadableCapture, "cannot open " + path.string());
  std::vector<Record> out;
  std::string line;
  size_t lineno = 0;
  if (format_of(path) == TableFormat::Jsonl) {
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      try {
        auto obj = nlohmann::json::parse(line);
        Record r;
        for (const auto& [k, v] : obj.items()) {
          if (v.is_string()) r[k] = v.get<std::string>();
          else if (v.is_null()) r[k] = "undefined";
          else if (v.is_boolean()) r[k] = v.get<bool>() ? "true" : "false";
          else r[k] = v.dump();
        }
        out.push_back(std::move(r));
      } catch (const nlohmann::json::exception& e) {
        fail(Errc::MalformedRecord, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    return out;
  }
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line, '\t');
    if (header.empty()) {
      header.assign(cells.begin(), cells.end());
      continue;
    }
    if (cells.size() != header.size())
      fail(Errc::MalformedRecord, path.string() + ":" + std::to_string(lineno) + ": expected " +
                                      std::to_string(header.size()) + " columns");
    Record r;
    for (size_t i = 0; i < cells.size(); ++i) r[header[i]] = std::string(cells[i]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace quicscatter::cli
