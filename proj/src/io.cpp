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

#include "icelayer/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "icelayer/errors.hpp"

namespace icelayer::io {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t read_u64(std::istream& in, const std::filesystem::path& path) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataError("truncated binary file " + path.string());
  return v;
}

}  // namespace

void write_container(const std::filesystem::path& path, std::string_view magic, const BinaryContainer& container) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const std::string header = container.header.dump();
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  write_u64(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  write_u64(out, container.payload.size());
  out.write(reinterpret_cast<const char*>(container.payload.data()),
            static_cast<std::streamsize>(container.payload.size() * sizeof(double)));
  if (!out) throw IoError("failed writing " + path.string());
}

bool has_magic(const std::filesystem::path& path, std::string_view magic) {
  std::ifstream in(path, std::ios::binary);
  std::string buf(magic.size(), '\0');
  return in.read(buf.data(), static_cast<std::streamsize>(buf.size())) && buf == magic;
}

BinaryContainer read_container(const std::filesystem::path& path, std::string_view magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string buf(magic.size(), '\0');
  if (!in.read(buf.data(), static_cast<std::streamsize>(buf.size())) || buf != magic) {
    throw DataError(path.string() + ": not a '" + std::string(magic) + "' file");
  }
  BinaryContainer c;
  const std::uint64_t header_len = read_u64(in, path);
  std::string header(header_len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(header_len))) {
    throw DataError("truncated header in " + path.string());
  }
  try {
    c.header = Json::parse(header);
  } catch (const Json::exception& e) {
    throw DataError("malformed header in " + path.string() + ": " + e.what());
  }
  const std::uint64_t count = read_u64(in, path);
  c.payload.resize(count);
  if (!in.read(reinterpret_cast<char*>(c.payload.data()), static_cast<std::streamsize>(count * sizeof(double)))) {
    throw DataError("truncated payload in " + path.string());
  }
  return c;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& json) { write_text(path, json.dump(1) + "\n"); }

Json model_config_to_json(const models::ModelConfig& config) {
  Json j;
  j["kind"] = models::model_kind_name(config.kind);
  j["hidden"] = config.hidden;
  j["head_widths"] = config.head_widths;
  j["dropout"] = config.dropout;
  j["attention_heads"] = config.attention_heads;
  j["leaky_slope"] = config.leaky_slope;
  j["edge_bias"] = models::edge_bias_name(config.edge_bias);
  return j;
}

models::ModelConfig model_config_from_json(const Json& j) {
  try {
    models::ModelConfig c;
    c.kind = models::parse_model_kind(j.at("kind").get<std::string>());
    c.hidden = j.at("hidden").get<std::size_t>();
    c.head_widths = j.at("head_widths").get<std::vector<std::size_t>>();
    c.dropout = j.at("dropout").get<double>();
    c.attention_heads = j.at("attention_heads").get<std::size_t>();
    c.leaky_slope = j.at("leaky_slope").get<double>();
    c.edge_bias = models::parse_edge_bias(j.at("edge_bias").get<std::string>());
    return c;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed model config: ") + e.what());
  }
}

}  // namespace icelayer::io
