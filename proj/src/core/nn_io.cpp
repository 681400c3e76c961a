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

// Model artifact layout:
//
//   XIDS-MODEL 1
//   layers <count> <size_0> ... <size_{count-1}>
//   dropout <rate>
//   seed <seed>
//   fingerprint <hex>
//   end
//
// followed by, for each layer in order, the fan_in x fan_out weight matrix
// (row-major) and the fan_out bias vector, as little-endian float32.

#include <fstream>
#include <sstream>

#include "core/io_util.hpp"
#include "core/nn.hpp"

namespace xids::nn {

namespace {
constexpr const char* kMagic = "XIDS-MODEL";
constexpr int kFormatVersion = 1;
}  // namespace

void SaveModel(const MlpModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  std::ostringstream header;
  header << kMagic << ' ' << kFormatVersion << '\n';
  header << "layers " << model.layer_sizes.size();
  for (int s : model.layer_sizes) header << ' ' << s;
  header << '\n';
  header << "dropout " << io::FormatExact(model.dropout_rate) << '\n';
  header << "seed " << model.seed << '\n';
  header << "fingerprint " << model.fingerprint() << '\n';
  header << "end\n";
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& layer : model.layers) {
    const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w =
        layer.weights.cast<float>();
    io::WriteFloatsLe(out, w.data(), static_cast<std::size_t>(w.size()));
    const Eigen::VectorXf b = layer.bias.cast<float>();
    io::WriteFloatsLe(out, b.data(), static_cast<std::size_t>(b.size()));
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

MlpModel LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  {
    std::istringstream ls(line);
    std::string magic;
    int version = 0;
    ls >> magic >> version;
    if (magic != kMagic) throw DataError(path + ": not a model artifact");
    if (version != kFormatVersion) {
      throw DataError(path + ": unsupported model format version " + std::to_string(version));
    }
  }
  MlpModel model;
  std::string fingerprint;
  bool ended = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end") {
      ended = true;
      break;
    } else if (key == "layers") {
      std::size_t count = 0;
      ls >> count;
      model.layer_sizes.resize(count);
      for (auto& s : model.layer_sizes) ls >> s;
      if (!ls) throw DataError(path + ": malformed layers line");
    } else if (key == "dropout") {
      std::string v;
      ls >> v;
      model.dropout_rate = io::ParseExact(v);
    } else if (key == "seed") {
      ls >> model.seed;
    } else if (key == "fingerprint") {
      ls >> fingerprint;
    } else {
      throw DataError(path + ": unexpected header line '" + line + "'");
    }
  }
  if (!ended || model.layer_sizes.size() < 2) throw DataError(path + ": malformed model header");
  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    const int fan_in = model.layer_sizes[l], fan_out = model.layer_sizes[l + 1];
    if (fan_in < 1 || fan_out < 1) throw DataError(path + ": invalid layer size");
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(fan_in, fan_out);
    io::ReadFloatsLe(in, w.data(), static_cast<std::size_t>(w.size()));
    Eigen::VectorXf b(fan_out);
    io::ReadFloatsLe(in, b.data(), static_cast<std::size_t>(b.size()));
    model.layers.push_back({w.cast<double>(), b.cast<double>()});
  }
  if (!fingerprint.empty() && fingerprint != model.fingerprint()) {
    throw DataError(path + ": model fingerprint mismatch (corrupt payload?)");
  }
  return model;
}

}  // namespace xids::nn
