/*
 * Copyright 2026 The xids Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Dataset artifact layout:
//
//   XIDS-DATASET 1
//   schema_id <hex>
//   feature <name> <kind>                       (41 lines)
//   vocab <feature> <n> <cat_1> ... <cat_n>     (one per categorical feature)
//   column <name> <min> <max>                   (one per encoded column)
//   split <name> <rows> <raw_bytes>             (one per split)
//   end
//
// followed, for every split in header order, by rows x columns little-endian
// float32 values (row-major) and then the split's raw record text
// (<raw_bytes> bytes, newline-terminated lines).

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "core/dataset.hpp"
#include "core/io_util.hpp"

namespace xids::dataset {

namespace {

constexpr const char* kMagic = "XIDS-DATASET";
constexpr int kFormatVersion = 1;

void CheckToken(const std::string& token, const char* what) {
  if (token.empty() || token.find_first_of(" \t\r\n") != std::string::npos) {
    throw DataError(std::string("cannot serialize ") + what + " '" + token +
                    "' (empty or contains whitespace)");
  }
}

}  // namespace

void SaveArtifact(const DatasetArtifact& artifact, const std::string& path) {
  const auto& schema = artifact.schema;
  std::ostringstream header;
  header << kMagic << ' ' << kFormatVersion << '\n';
  header << "schema_id " << schema.fingerprint() << '\n';
  for (const auto& f : schema.features) {
    CheckToken(f.name, "feature name");
    header << "feature " << f.name << ' ' << FeatureKindName(f.kind) << '\n';
  }
  for (const auto& f : schema.features) {
    if (f.kind != FeatureKind::kCategorical) continue;
    const auto& cats = schema.vocab.at(f.name);
    header << "vocab " << f.name << ' ' << cats.size();
    for (const auto& c : cats) {
      CheckToken(c, "category");
      header << ' ' << c;
    }
    header << '\n';
  }
  for (int c = 0; c < schema.encoded_width(); ++c) {
    header << "column " << schema.columns[c].name << ' ' << io::FormatExact(schema.col_min[c])
           << ' ' << io::FormatExact(schema.col_max[c]) << '\n';
  }
  std::vector<std::string> raw_blocks;
  for (std::size_t s = 0; s < artifact.splits.size(); ++s) {
    std::string block;
    for (const auto& line : artifact.raw_lines[s]) {
      block += line;
      block += '\n';
    }
    header << "split " << artifact.split_names[s] << ' ' << artifact.splits[s].rows() << ' '
           << block.size() << '\n';
    raw_blocks.push_back(std::move(block));
  }
  header << "end\n";

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (std::size_t s = 0; s < artifact.splits.size(); ++s) {
    const auto& values = artifact.splits[s].values;
    io::WriteFloatsLe(out, values.data(), static_cast<std::size_t>(values.size()));
    out.write(raw_blocks[s].data(), static_cast<std::streamsize>(raw_blocks[s].size()));
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

DatasetArtifact LoadArtifact(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  {
    std::istringstream ls(line);
    std::string magic;
    int version = 0;
    ls >> magic >> version;
    if (magic != kMagic) throw DataError(path + ": not a dataset artifact");
    if (version != kFormatVersion) {
      throw DataError(path + ": unsupported dataset format version " + std::to_string(version));
    }
  }
  DatasetArtifact artifact;
  auto& schema = artifact.schema;
  std::string schema_id;
  std::vector<std::tuple<std::string, double, double>> column_lines;
  std::vector<std::pair<std::size_t, std::size_t>> split_sizes;
  bool ended = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end") {
      ended = true;
      break;
    } else if (key == "schema_id") {
      ls >> schema_id;
    } else if (key == "feature") {
      std::string name, kind;
      ls >> name >> kind;
      schema.features.push_back({name, ParseFeatureKind(kind)});
    } else if (key == "vocab") {
      std::string name;
      std::size_t n = 0;
      ls >> name >> n;
      auto& cats = schema.vocab[name];
      for (std::size_t i = 0; i < n; ++i) {
        std::string c;
        if (!(ls >> c)) throw DataError(path + ": truncated vocab line for " + name);
        cats.push_back(c);
      }
    } else if (key == "column") {
      std::string name, lo, hi;
      ls >> name >> lo >> hi;
      column_lines.emplace_back(name, io::ParseExact(lo), io::ParseExact(hi));
    } else if (key == "split") {
      std::string name;
      std::size_t rows = 0, bytes = 0;
      if (!(ls >> name >> rows >> bytes)) throw DataError(path + ": malformed split line");
      artifact.split_names.push_back(name);
      split_sizes.emplace_back(rows, bytes);
    } else {
      throw DataError(path + ": unexpected header line '" + line + "'");
    }
  }
  if (!ended) throw DataError(path + ": header not terminated");
  schema.RebuildColumns();
  if (column_lines.size() != schema.columns.size()) {
    throw DataError(path + ": column count does not match schema");
  }
  for (std::size_t c = 0; c < column_lines.size(); ++c) {
    const auto& [name, lo, hi] = column_lines[c];
    if (name != schema.columns[c].name) {
      throw DataError(path + ": column " + std::to_string(c) + " is '" + name + "', expected '" +
                      schema.columns[c].name + "'");
    }
    schema.col_min.push_back(lo);
    schema.col_max.push_back(hi);
  }
  if (!schema_id.empty() && schema_id != schema.fingerprint()) {
    throw DataError(path + ": schema fingerprint mismatch");
  }
  const int width = schema.encoded_width();
  for (std::size_t s = 0; s < split_sizes.size(); ++s) {
    const auto [rows, bytes] = split_sizes[s];
    EncodedMatrix m;
    m.schema_id = schema.fingerprint();
    m.values.resize(static_cast<Eigen::Index>(rows), width);
    io::ReadFloatsLe(in, m.values.data(), rows * static_cast<std::size_t>(width));
    std::string block(bytes, '\0');
    in.read(block.data(), static_cast<std::streamsize>(bytes));
    if (!in) throw DataError(path + ": truncated payload in split " + artifact.split_names[s]);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < block.size()) {
      const auto nl = block.find('\n', start);
      lines.push_back(block.substr(start, nl - start));
      start = nl == std::string::npos ? block.size() : nl + 1;
    }
    if (lines.size() != rows) throw DataError(path + ": raw record count mismatch");
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const Record rec = ParseRecordLine(lines[i], i + 1);
      m.labels.push_back(BinarizeLabel(rec.label));
      m.raw_labels.push_back(rec.label);
    }
    artifact.splits.push_back(std::move(m));
    artifact.raw_lines.push_back(std::move(lines));
  }
  return artifact;
}

}  // namespace xids::dataset
