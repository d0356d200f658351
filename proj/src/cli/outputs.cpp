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

#include <fstream>

#include "commands.hpp"
#include "quicscatter/cli/app.hpp"
#include "quicscatter/common/error.hpp"

namespace quicscatter::cli {

RunOutputs::RunOutputs(const GlobalOptions& global, std::string subcommand)
    : global_(global), subcommand_(std::move(subcommand)) {
  if (!global.config.empty()) configs_.push_back(global.config);
}

void RunOutputs::table(const std::string& stem, const Table& t) {
  files_.emplace_back(stem + std::string(extension(global_.format)), t.render(global_.format));
}

void RunOutputs::file(const std::string& name, std::string bytes) { files_.emplace_back(name, std::move(bytes)); }

void RunOutputs::commit() {
  namespace fs = std::filesystem;
  fs::path dir(global_.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::InvalidConfig, "cannot create output directory " + dir.string() + ": " + ec.message());

  auto write = [&](const std::string& name, const std::string& bytes) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) fail(Errc::InvalidConfig, "cannot write " + (dir / name).string());
  };

  Cell manifest = Cell::object();
  manifest["tool"] = "quicscatter";
  manifest["tool_version"] = kToolVersion;
  manifest["schema_version"] = kSchemaVersion;
  manifest["subcommand"] = subcommand_;
  manifest["seed"] = seed_ ? Cell(*seed_) : Cell(nullptr);
  manifest["format"] = global_.format == TableFormat::Tsv ? "tsv" : "jsonl";
  manifest["configs"] = configs_;
  manifest["inputs"] = inputs_;
  manifest["out_dir"] = global_.out_dir;
  Cell outputs = Cell::array();
  for (const auto& [name, bytes] : files_) {
    write(name, bytes);
    outputs.push_back(name);
  }
  manifest["outputs"] = outputs;
  write(subcommand_ + ".manifest.json", manifest.dump(2) + "\n");
}

}  // namespace quicscatter::cli
