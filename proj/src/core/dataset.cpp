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

#include "core/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace xids::dataset {

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool ParseDouble(std::string_view s, double* out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(*out);
}

}  // namespace

const char* FeatureKindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kContinuous: return "continuous";
    case FeatureKind::kDiscrete: return "discrete";
    case FeatureKind::kBinary: return "binary";
    case FeatureKind::kCategorical: return "categorical";
  }
  return "continuous";
}

FeatureKind ParseFeatureKind(const std::string& name) {
  if (name == "continuous") return FeatureKind::kContinuous;
  if (name == "discrete") return FeatureKind::kDiscrete;
  if (name == "binary") return FeatureKind::kBinary;
  if (name == "categorical") return FeatureKind::kCategorical;
  throw DataError("unknown feature kind '" + name + "'");
}

const std::vector<FeatureSpec>& NslKddFeatures() {
  using K = FeatureKind;
  static const std::vector<FeatureSpec> kFeatures = {
      {"duration", K::kContinuous},
      {"protocol_type", K::kCategorical},
      {"service", K::kCategorical},
      {"flag", K::kCategorical},
      {"src_bytes", K::kContinuous},
      {"dst_bytes", K::kContinuous},
      {"land", K::kBinary},
      {"wrong_fragment", K::kDiscrete},
      {"urgent", K::kDiscrete},
      {"hot", K::kDiscrete},
      {"num_failed_logins", K::kDiscrete},
      {"logged_in", K::kBinary},
      {"num_compromised", K::kDiscrete},
      {"root_shell", K::kBinary},
      {"su_attempted", K::kBinary},
      {"num_root", K::kDiscrete},
      {"num_file_creations", K::kDiscrete},
      {"num_shells", K::kDiscrete},
      {"num_access_files", K::kDiscrete},
      {"num_outbound_cmds", K::kDiscrete},
      {"is_host_login", K::kBinary},
      {"is_guest_login", K::kBinary},
      {"count", K::kDiscrete},
      {"srv_count", K::kDiscrete},
      {"serror_rate", K::kContinuous},
      {"srv_serror_rate", K::kContinuous},
      {"rerror_rate", K::kContinuous},
      {"srv_rerror_rate", K::kContinuous},
      {"same_srv_rate", K::kContinuous},
      {"diff_srv_rate", K::kContinuous},
      {"srv_diff_host_rate", K::kContinuous},
      {"dst_host_count", K::kDiscrete},
      {"dst_host_srv_count", K::kDiscrete},
      {"dst_host_same_srv_rate", K::kContinuous},
      {"dst_host_diff_srv_rate", K::kContinuous},
      {"dst_host_same_src_port_rate", K::kContinuous},
      {"dst_host_srv_diff_host_rate", K::kContinuous},
      {"dst_host_serror_rate", K::kContinuous},
      {"dst_host_srv_serror_rate", K::kContinuous},
      {"dst_host_rerror_rate", K::kContinuous},
      {"dst_host_srv_rerror_rate", K::kContinuous},
  };
  return kFeatures;
}

Record ParseRecordLine(const std::string& line, std::size_t line_number) {
  const auto& features = NslKddFeatures();
  std::vector<std::string_view> fields;
  fields.reserve(kRawFieldCount);
  std::string_view rest(line);
  while (true) {
    const auto comma = rest.find(',');
    fields.push_back(Trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  const std::string where = "line " + std::to_string(line_number);
  if (fields.size() != kRawFieldCount) {
    throw DataError(where + ": expected 43 fields, found " + std::to_string(fields.size()));
  }
  Record record;
  record.text.resize(kFeatureCount);
  record.number.assign(kFeatureCount, std::nan(""));
  for (int f = 0; f < kFeatureCount; ++f) {
    record.text[f] = std::string(fields[f]);
    if (features[f].kind == FeatureKind::kCategorical) {
      continue;
    }
    if (!ParseDouble(fields[f], &record.number[f])) {
      throw DataError(where + ": field " + std::to_string(f + 1) + " (" + features[f].name +
                      "): expected a number, got '" + std::string(fields[f]) + "'");
    }
  }
  record.label = std::string(fields[kFeatureCount]);
  if (record.label.empty()) {
    throw DataError(where + ": field 42 (label) is empty");
  }
  double difficulty = 0;
  if (!ParseDouble(fields[kFeatureCount + 1], &difficulty)) {
    throw DataError(where + ": field 43 (difficulty): expected a number, got '" +
                    std::string(fields[kFeatureCount + 1]) + "'");
  }
  record.difficulty = static_cast<int>(difficulty);
  return record;
}

RecordTable ParseNslKdd(std::istream& in, const std::string& source_name) {
  RecordTable table;
  table.source_name = source_name;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    table.rows.push_back(ParseRecordLine(line, line_number));
  }
  return table;
}

RecordTable ParseNslKddFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return ParseNslKdd(in, path);
}

std::vector<std::string> FeatureSchema::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (const auto& c : columns) names.push_back(c.name);
  return names;
}

std::vector<OneHotGroup> FeatureSchema::one_hot_groups() const {
  std::vector<OneHotGroup> groups;
  for (int c = 0; c < encoded_width(); ++c) {
    if (columns[c].category < 0) continue;
    if (groups.empty() || groups.back().feature != columns[c].feature) {
      groups.push_back({columns[c].feature, c, 0});
    }
    ++groups.back().size;
  }
  return groups;
}

FeatureKind FeatureSchema::column_kind(int column) const {
  const auto& c = columns.at(column);
  if (c.category >= 0) return FeatureKind::kCategorical;
  return features.at(c.feature).kind;
}

std::optional<int> FeatureSchema::column_index(const std::string& name) const {
  for (int c = 0; c < encoded_width(); ++c) {
    if (columns[c].name == name) return c;
  }
  return std::nullopt;
}

std::string FeatureSchema::fingerprint() const {
  Fnv1a h;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    h.Update(columns[c].name);
    h.Update("\0", 1);
    h.Update(&col_min[c], sizeof(double));
    h.Update(&col_max[c], sizeof(double));
  }
  return h.HexDigest();
}

void FeatureSchema::RebuildColumns() {
  columns.clear();
  for (int f = 0; f < static_cast<int>(features.size()); ++f) {
    const auto& spec = features[f];
    if (spec.kind != FeatureKind::kCategorical) {
      columns.push_back({spec.name, f, -1});
      continue;
    }
    const auto it = vocab.find(spec.name);
    if (it == vocab.end()) continue;
    for (int k = 0; k < static_cast<int>(it->second.size()); ++k) {
      columns.push_back({spec.name + "_" + it->second[k], f, k});
    }
  }
}

namespace {

// Numeric value (before scaling) of an encoded column for one record.
double RawColumnValue(const Record& record, const FeatureSchema& schema, int column,
                      const std::vector<std::unordered_map<std::string, int>>& lookup) {
  const auto& col = schema.columns[column];
  if (col.category < 0) return record.number[col.feature];
  const auto& table = lookup[col.feature];
  const auto it = table.find(record.text[col.feature]);
  return (it != table.end() && it->second == col.category) ? 1.0 : 0.0;
}

std::vector<std::unordered_map<std::string, int>> BuildLookup(const FeatureSchema& schema) {
  std::vector<std::unordered_map<std::string, int>> lookup(schema.features.size());
  for (std::size_t f = 0; f < schema.features.size(); ++f) {
    const auto it = schema.vocab.find(schema.features[f].name);
    if (it == schema.vocab.end()) continue;
    for (int k = 0; k < static_cast<int>(it->second.size()); ++k) {
      lookup[f].emplace(it->second[k], k);
    }
  }
  return lookup;
}

}  // namespace

FeatureSchema FitSchema(const RecordTable& train) {
  if (train.rows.empty()) throw DataError("cannot fit a schema on an empty table");
  FeatureSchema schema;
  schema.features = NslKddFeatures();
  for (const auto& spec : schema.features) {
    if (spec.kind == FeatureKind::kCategorical) schema.vocab[spec.name];
  }
  for (const auto& row : train.rows) {
    for (std::size_t f = 0; f < schema.features.size(); ++f) {
      if (schema.features[f].kind != FeatureKind::kCategorical) continue;
      auto& v = schema.vocab[schema.features[f].name];
      if (std::find(v.begin(), v.end(), row.text[f]) == v.end()) v.push_back(row.text[f]);
    }
  }
  schema.RebuildColumns();

  const int width = schema.encoded_width();
  schema.col_min.assign(width, std::numeric_limits<double>::infinity());
  schema.col_max.assign(width, -std::numeric_limits<double>::infinity());
  const auto lookup = BuildLookup(schema);
  for (const auto& row : train.rows) {
    for (int c = 0; c < width; ++c) {
      const double v = RawColumnValue(row, schema, c, lookup);
      schema.col_min[c] = std::min(schema.col_min[c], v);
      schema.col_max[c] = std::max(schema.col_max[c], v);
    }
  }
  return schema;
}

int BinarizeLabel(const std::string& raw_label) { return raw_label == "normal" ? 0 : 1; }

Vector EncodeRecord(const Record& record, const FeatureSchema& schema) {
  const auto lookup = BuildLookup(schema);
  Vector out(schema.encoded_width());
  for (int c = 0; c < schema.encoded_width(); ++c) {
    const double v = RawColumnValue(record, schema, c, lookup);
    const double range = schema.col_max[c] - schema.col_min[c];
    out[c] = range > 0 ? std::clamp((v - schema.col_min[c]) / range, 0.0, 1.0) : 0.0;
  }
  return out;
}

EncodedMatrix Encode(const RecordTable& table, const FeatureSchema& schema) {
  const auto lookup = BuildLookup(schema);
  const int width = schema.encoded_width();
  EncodedMatrix m;
  m.values.resize(static_cast<Eigen::Index>(table.rows.size()), width);
  m.labels.reserve(table.rows.size());
  m.raw_labels.reserve(table.rows.size());
  m.schema_id = schema.fingerprint();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    for (int c = 0; c < width; ++c) {
      const double v = RawColumnValue(row, schema, c, lookup);
      const double range = schema.col_max[c] - schema.col_min[c];
      const double scaled = range > 0 ? std::clamp((v - schema.col_min[c]) / range, 0.0, 1.0) : 0.0;
      m.values(static_cast<Eigen::Index>(i), c) = static_cast<float>(scaled);
    }
    m.labels.push_back(BinarizeLabel(row.label));
    m.raw_labels.push_back(row.label);
  }
  return m;
}

EncodedMatrix EncodedMatrix::Subset(const std::vector<std::size_t>& indices) const {
  EncodedMatrix out;
  out.values.resize(static_cast<Eigen::Index>(indices.size()), values.cols());
  out.schema_id = schema_id;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(indices[i]));
    out.labels.push_back(labels.at(indices[i]));
    out.raw_labels.push_back(raw_labels.at(indices[i]));
  }
  return out;
}

TrainStats ComputeTrainStats(const EncodedMatrix& train, const FeatureSchema& schema) {
  if (train.rows() == 0) throw DataError("training matrix is empty");
  TrainStats stats;
  const Matrix x = train.values.cast<double>();
  stats.mean = x.colwise().mean().transpose();
  stats.stddev = ((x.rowwise() - stats.mean.transpose()).array().square().colwise().mean())
                     .sqrt()
                     .transpose();
  stats.groups = schema.one_hot_groups();
  for (const auto& g : stats.groups) {
    std::vector<double> freq(g.size);
    for (int k = 0; k < g.size; ++k) freq[k] = stats.mean[g.first_column + k];
    stats.group_frequencies.push_back(std::move(freq));
  }
  for (int c = 0; c < schema.encoded_width(); ++c) {
    if (schema.column_kind(c) == FeatureKind::kBinary) stats.binary_columns.push_back(c);
  }
  return stats;
}

TableStats SummarizeTable(const RecordTable& table, std::size_t top_k) {
  const auto& features = NslKddFeatures();
  TableStats stats;
  stats.source_name = table.source_name;
  stats.rows = table.rows.size();
  for (const auto& row : table.rows) {
    ++stats.label_counts[row.label];
    if (BinarizeLabel(row.label) == 0) {
      ++stats.normal;
    } else {
      ++stats.attack;
    }
  }
  for (int f = 0; f < kFeatureCount; ++f) {
    FeatureStats fs;
    fs.name = features[f].name;
    fs.kind = features[f].kind;
    fs.count = table.rows.size();
    if (features[f].kind == FeatureKind::kCategorical) {
      std::map<std::string, std::size_t> counts;
      for (const auto& row : table.rows) {
        if (row.text[f].empty()) {
          ++fs.missing;
        } else {
          ++counts[row.text[f]];
        }
      }
      fs.distinct = counts.size();
      std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
      std::stable_sort(sorted.begin(), sorted.end(),
                       [](const auto& a, const auto& b) { return a.second > b.second; });
      std::size_t shown = 0;
      for (std::size_t i = 0; i < sorted.size() && i < top_k; ++i) {
        fs.top.push_back(sorted[i]);
        shown += sorted[i].second;
      }
      if (shown + fs.missing < fs.count) fs.top.emplace_back("(other)", fs.count - fs.missing - shown);
      if (fs.missing > 0) fs.top.emplace_back("(missing)", fs.missing);
    } else {
      std::set<double> distinct;
      double sum = 0, sum_sq = 0;
      fs.min = std::numeric_limits<double>::infinity();
      fs.max = -std::numeric_limits<double>::infinity();
      for (const auto& row : table.rows) {
        const double v = row.number[f];
        distinct.insert(v);
        sum += v;
        fs.min = std::min(fs.min, v);
        fs.max = std::max(fs.max, v);
      }
      const double n = static_cast<double>(table.rows.size());
      fs.distinct = distinct.size();
      if (n > 0) {
        fs.mean = sum / n;
        for (const auto& row : table.rows) sum_sq += (row.number[f] - fs.mean) * (row.number[f] - fs.mean);
        fs.stddev = std::sqrt(sum_sq / n);
      } else {
        fs.min = fs.max = 0;
      }
    }
    stats.features.push_back(std::move(fs));
  }
  return stats;
}

DatasetSummary SummarizeCompare(const RecordTable& train, const RecordTable& test) {
  return {SummarizeTable(train), SummarizeTable(test)};
}

const EncodedMatrix& DatasetArtifact::split(const std::string& name) const {
  for (std::size_t i = 0; i < split_names.size(); ++i) {
    if (split_names[i] == name) return splits[i];
  }
  throw UsageError("dataset has no split '" + name + "'");
}

const std::vector<std::string>& DatasetArtifact::raw(const std::string& name) const {
  for (std::size_t i = 0; i < split_names.size(); ++i) {
    if (split_names[i] == name) return raw_lines[i];
  }
  throw UsageError("dataset has no split '" + name + "'");
}

bool DatasetArtifact::has_split(const std::string& name) const {
  return std::find(split_names.begin(), split_names.end(), name) != split_names.end();
}

namespace {

std::vector<std::string> NonEmptyLines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!Trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

DatasetArtifact IngestText(const std::string& train_text, const std::string& test_text) {
  std::istringstream train_in(train_text), test_in(test_text);
  const RecordTable train = ParseNslKdd(train_in, "train");
  const RecordTable test = ParseNslKdd(test_in, "test");
  DatasetArtifact artifact;
  artifact.schema = FitSchema(train);
  artifact.split_names = {"train", "test"};
  artifact.splits.push_back(Encode(train, artifact.schema));
  artifact.splits.push_back(Encode(test, artifact.schema));
  artifact.raw_lines.push_back(NonEmptyLines(train_text));
  artifact.raw_lines.push_back(NonEmptyLines(test_text));
  return artifact;
}

DatasetArtifact Ingest(const std::string& train_path, const std::string& test_path) {
  return IngestText(ReadFile(train_path), ReadFile(test_path));
}

}  // namespace xids::dataset
