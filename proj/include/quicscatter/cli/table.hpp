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

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace quicscatter::cli {

enum class TableFormat { Tsv, Jsonl };

std::string_view extension(TableFormat format);  // ".tsv" / ".jsonl"

using Cell = nlohmann::ordered_json;

// Fixed-notation text for floats so outputs compare byte for byte.
std::string format_double(double value, int precision = 6);

// Rows of typed cells rendered as TSV (header line, "undefined" for null) or
// JSON lines keyed by column name.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<Cell> row);
  size_t size() const { return rows_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  std::string render(TableFormat format) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

// Table read back as text cells. Format follows the file extension.
using Record = std::map<std::string, std::string>;
std::vector<Record> read_table(const std::filesystem::path& path);
TableFormat format_of(const std::filesystem::path& path);

}  // namespace quicscatter::cli
