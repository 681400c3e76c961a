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

// NSL-KDD ingestion and the 41 -> 122 column encoding.
//
// A raw record carries 41 feature fields, the label string and a difficulty
// score. Categorical features are one-hot expanded in place (vocabulary order
// is the order of first appearance in the training file), every encoded
// column is min-max scaled with bounds fit on the training table, and labels
// are binarized as normal -> 0, anything else -> 1.

#ifndef XIDS_CORE_DATASET_HPP_
#define XIDS_CORE_DATASET_HPP_

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace xids::dataset {

inline constexpr int kRawFieldCount = 43;
inline constexpr int kFeatureCount = 41;

enum class FeatureKind { kContinuous, kDiscrete, kBinary, kCategorical };

const char* FeatureKindName(FeatureKind kind);
FeatureKind ParseFeatureKind(const std::string& name);

struct FeatureSpec {
  std::string name;
  FeatureKind kind;
};

// The fixed NSL-KDD feature layout, in file order.
const std::vector<FeatureSpec>& NslKddFeatures();

struct Record {
  // One entry per feature; categorical fields keep `text`, numeric ones
  // `number` (text is also retained for reporting).
  std::vector<std::string> text;
  std::vector<double> number;
  std::string label;
  int difficulty = 0;
};

struct RecordTable {
  std::vector<Record> rows;
  std::string source_name;
  std::size_t size() const { return rows.size(); }
};

// Parses newline-delimited, comma-separated NSL-KDD records. Blank lines are
// skipped. Throws DataError("line N: ...") on malformed input.
RecordTable ParseNslKdd(std::istream& in, const std::string& source_name = "");
RecordTable ParseNslKddFile(const std::string& path);
Record ParseRecordLine(const std::string& line, std::size_t line_number);

struct EncodedColumn {
  std::string name;
  int feature = 0;       // index into FeatureSchema::features
  int category = -1;     // index into the vocabulary, -1 for numeric columns
};

struct OneHotGroup {
  int feature = 0;
  int first_column = 0;
  int size = 0;
};

class FeatureSchema {
 public:
  std::vector<FeatureSpec> features;
  std::map<std::string, std::vector<std::string>> vocab;
  std::vector<EncodedColumn> columns;
  std::vector<double> col_min;
  std::vector<double> col_max;

  int encoded_width() const { return static_cast<int>(columns.size()); }
  std::vector<std::string> column_names() const;
  std::vector<OneHotGroup> one_hot_groups() const;
  // Column kind: categorical for one-hot indicators, else the source kind.
  FeatureKind column_kind(int column) const;
  std::optional<int> column_index(const std::string& name) const;
  // Fingerprint over the column layout and the fitted bounds.
  std::string fingerprint() const;

  // Rebuilds `columns` from `features` and `vocab`.
  void RebuildColumns();
};

// Builds the schema from a training table. Throws DataError when empty.
FeatureSchema FitSchema(const RecordTable& train);

struct EncodedMatrix {
  RowMatrixF values;                   // n x encoded_width, entries in [0,1]
  std::vector<int> labels;             // 0 = normal, 1 = attack
  std::vector<std::string> raw_labels;
  std::string schema_id;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
  Vector row(std::size_t i) const { return values.row(i).cast<double>().transpose(); }
  // Copies the selected rows, in the given order.
  EncodedMatrix Subset(const std::vector<std::size_t>& indices) const;
};

int BinarizeLabel(const std::string& raw_label);

Vector EncodeRecord(const Record& record, const FeatureSchema& schema);
EncodedMatrix Encode(const RecordTable& table, const FeatureSchema& schema);

// Per-column statistics of an encoded training matrix, consumed by the
// perturbation and similarity code.
struct TrainStats {
  Vector mean;
  Vector stddev;
  // For each one-hot group, the category frequencies in training order.
  std::vector<OneHotGroup> groups;
  std::vector<std::vector<double>> group_frequencies;
  // Encoded columns of binary source features.
  std::vector<int> binary_columns;
};

TrainStats ComputeTrainStats(const EncodedMatrix& train, const FeatureSchema& schema);

struct FeatureStats {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  std::size_t count = 0;
  std::size_t missing = 0;
  std::size_t distinct = 0;
  double mean = 0, stddev = 0, min = 0, max = 0;
  // Categorical: most frequent categories (descending count, ties by name)
  // followed by an "(other)" bucket so counts always sum to `count`.
  std::vector<std::pair<std::string, std::size_t>> top;
};

struct TableStats {
  std::string source_name;
  std::size_t rows = 0;
  std::size_t normal = 0;
  std::size_t attack = 0;
  std::map<std::string, std::size_t> label_counts;
  std::vector<FeatureStats> features;
  double attack_fraction() const { return rows ? double(attack) / double(rows) : 0.0; }
};

struct DatasetSummary {
  TableStats train;
  TableStats test;
};

TableStats SummarizeTable(const RecordTable& table, std::size_t top_k = 10);
DatasetSummary SummarizeCompare(const RecordTable& train, const RecordTable& test);

// On-disk artifact: schema + encoded splits + the raw record lines.
struct DatasetArtifact {
  FeatureSchema schema;
  std::vector<std::string> split_names;        // e.g. {"train", "test"}
  std::vector<EncodedMatrix> splits;
  std::vector<std::vector<std::string>> raw_lines;

  const EncodedMatrix& split(const std::string& name) const;
  const std::vector<std::string>& raw(const std::string& name) const;
  bool has_split(const std::string& name) const;
};

void SaveArtifact(const DatasetArtifact& artifact, const std::string& path);
DatasetArtifact LoadArtifact(const std::string& path);

// Ingest from raw files: parse, fit on train, encode both.
DatasetArtifact Ingest(const std::string& train_path, const std::string& test_path);
DatasetArtifact IngestText(const std::string& train_text, const std::string& test_text);

}  // namespace xids::dataset

#endif  // XIDS_CORE_DATASET_HPP_
