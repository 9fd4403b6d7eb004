/* Copyright 2026 The lipaug Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "lipaug/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "lipaug/errors.hpp"

namespace lipaug {
namespace {

using nlohmann::json;

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                      : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "dataset CSV line " << line_no << ": bad number '" << field << "'";
    throw IoError(msg.str());
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  for (int i = 15; i >= 0; --i) {
    buf[i] = "0123456789abcdef"[hash & 0xf];
    hash >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

// ---------------------------------------------------------------------------
// Models

std::string model_to_json(const ModelFile& model) {
  json weights = json::array();
  for (const DenseMatrix& w : model.net.weights()) {
    json rows = json::array();
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const auto r = w.row(i);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    weights.push_back(std::move(rows));
  }
  json j{{"format_version", kModelFormatVersion},
         {"activation", activation_name(model.net.activation())},
         {"activation_deriv_lipschitz", model.net.activation_deriv_lipschitz()},
         {"metadata",
          {{"seed", model.metadata.seed}, {"config_digest", model.metadata.config_digest}}},
         {"weights", std::move(weights)}};
  return j.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw IoError("model: unsupported format_version");
    }
    const Activation act = parse_activation(j.at("activation").get<std::string>());
    const double lip = j.at("activation_deriv_lipschitz").get<double>();
    std::vector<DenseMatrix> weights;
    for (const json& w : j.at("weights")) {
      weights.push_back(DenseMatrix::from_rows(w.get<std::vector<std::vector<double>>>()));
    }
    ModelMetadata meta;
    if (j.contains("metadata")) {
      const json& m = j.at("metadata");
      meta.seed = m.value("seed", std::uint64_t{0});
      meta.config_digest = m.value("config_digest", std::string());
    }
    return ModelFile{SmoothNet(std::move(weights), act, lip), meta};
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(std::string("model: ") + e.what());
  }
}

void save_model(const std::string& path, const ModelFile& model) {
  write_file(path, model_to_json(model));
}

ModelFile load_model(const std::string& path) { return model_from_json(read_file(path)); }

// ---------------------------------------------------------------------------
// Datasets

std::string dataset_to_csv(const Examples& data) {
  std::ostringstream out;
  const std::size_t d = data.empty() ? 0 : data.front().x.size();
  for (std::size_t k = 0; k < d; ++k) out << 'f' << k + 1 << ',';
  out << "label\n";
  for (const Example& ex : data) {
    if (ex.x.size() != d) throw ShapeError("dataset_to_csv: ragged examples");
    for (double v : ex.x) out << format_double(v) << ',';
    out << ex.y << '\n';
  }
  return out.str();
}

Examples dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset CSV: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  const std::size_t d = header.size() - 1;
  if (header.size() < 2 || header.back() != "label") {
    throw IoError("dataset CSV: header must be f1,...,fd,label");
  }
  for (std::size_t k = 0; k < d; ++k) {
    if (header[k] != "f" + std::to_string(k + 1)) {
      throw IoError("dataset CSV: header must be f1,...,fd,label");
    }
  }
  Examples data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != d + 1) {
      std::ostringstream msg;
      msg << "dataset CSV line " << line_no << ": expected " << d + 1 << " fields";
      throw IoError(msg.str());
    }
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = parse_double(fields[k], line_no);
    std::size_t y = 0;
    const auto res = std::from_chars(fields[d].data(), fields[d].data() + fields[d].size(), y);
    if (res.ec != std::errc() || res.ptr != fields[d].data() + fields[d].size()) {
      std::ostringstream msg;
      msg << "dataset CSV line " << line_no << ": bad label '" << fields[d] << "'";
      throw IoError(msg.str());
    }
    data.push_back({DenseVector(std::move(x)), y});
  }
  if (data.empty()) throw IoError("dataset CSV: no rows");
  return data;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace lipaug
