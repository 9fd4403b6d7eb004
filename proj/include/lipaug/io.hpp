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

// Model and dataset files. Numbers are written in their shortest
// round-trip form so save -> load -> save is byte-stable.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "lipaug/smoothnet.hpp"

namespace lipaug {

inline constexpr int kModelFormatVersion = 1;

// Shortest decimal that parses back to the same double; "nan", "inf".
std::string format_double(double value);

// FNV-1a 64, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

struct ModelMetadata {
  std::uint64_t seed = 0;
  std::string config_digest;
};

struct ModelFile {
  SmoothNet net;
  ModelMetadata metadata;
};

// Keys sorted, two-space indent, trailing newline.
std::string model_to_json(const ModelFile& model);
// Throws IoError on malformed JSON, a wrong format version, an unknown
// activation or inconsistent shapes.
ModelFile model_from_json(const std::string& text);

void save_model(const std::string& path, const ModelFile& model);
ModelFile load_model(const std::string& path);

// Header f1,...,fd,label.
std::string dataset_to_csv(const Examples& data);
// Throws IoError on a bad header, ragged rows, non-numeric fields or
// negative labels.
Examples dataset_from_csv(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace lipaug
