// Copyright 2026 The icelayer Authors. All Rights Reserved.
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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "icelayer/models.hpp"

namespace icelayer::io {

using Json = nlohmann::ordered_json;

// Header + payload container used by the flat binary formats:
//   8-byte magic | u64 LE header length | UTF-8 JSON header |
//   u64 LE value count | IEEE-754 binary64 LE values
struct BinaryContainer {
  Json header;
  std::vector<double> payload;
};

void write_container(const std::filesystem::path& path, std::string_view magic, const BinaryContainer& container);
BinaryContainer read_container(const std::filesystem::path& path, std::string_view magic);
// True when the file starts with `magic`.
bool has_magic(const std::filesystem::path& path, std::string_view magic);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& json);

Json model_config_to_json(const models::ModelConfig& config);
models::ModelConfig model_config_from_json(const Json& json);

}  // namespace icelayer::io
