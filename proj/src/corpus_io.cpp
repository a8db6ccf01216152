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

#include "icelayer/corpus_io.hpp"

#include <png.h>

#include <charconv>
#include <cstring>
#include <sstream>

#include "icelayer/errors.hpp"
#include "icelayer/eval.hpp"
#include "icelayer/io.hpp"

namespace icelayer::corpus {

namespace fs = std::filesystem;
using io::Json;

namespace {

constexpr std::string_view kManifestFormat = "icelayer-corpus";
constexpr std::string_view kPreparedFormat = "icelayer-prepared";
constexpr std::string_view kPreparedMagic = "ICEPREP1";

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

double parse_number(std::string_view text, const fs::path& path, std::size_t line) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": cannot parse number '" + t + "'");
  }
  return value;
}

}  // namespace

Manifest read_manifest(const fs::path& manifest_path) {
  if (!fs::exists(manifest_path)) throw IoError("manifest not found: " + manifest_path.string());
  const Json j = io::read_json(manifest_path);
  Manifest m;
  m.root = manifest_path.parent_path();
  try {
    if (j.at("format").get<std::string>() != kManifestFormat) {
      throw DataError(manifest_path.string() + ": unexpected format '" + j.at("format").get<std::string>() + "'");
    }
    m.columns = j.value("columns", kEchogramColumns);
    for (const auto& r : j.at("records")) {
      m.records.push_back(ManifestEntry{r.at("id").get<std::string>(), r.at("mask").get<std::string>(),
                                        r.at("geo").get<std::string>()});
    }
  } catch (const Json::exception& e) {
    throw DataError(manifest_path.string() + ": malformed manifest: " + e.what());
  }
  return m;
}

void write_manifest(const fs::path& manifest_path, const Manifest& manifest) {
  Json j;
  j["format"] = kManifestFormat;
  j["version"] = 1;
  j["columns"] = manifest.columns;
  Json records = Json::array();
  for (const auto& r : manifest.records) {
    records.push_back({{"id", r.id}, {"mask", r.mask.generic_string()}, {"geo", r.geo.generic_string()}});
  }
  j["records"] = std::move(records);
  io::write_json(manifest_path, j);
}

void write_mask_png(const fs::path& path, const EchogramRecord& record) {
  std::vector<png_byte> pixels(record.mask.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = record.mask[i] != 0 ? 255 : 0;
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(record.width);
  image.height = static_cast<png_uint_32>(record.height);
  image.format = PNG_FORMAT_GRAY;
  if (png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr) == 0) {
    const std::string message = image.message;
    png_image_free(&image);
    throw IoError("cannot write PNG " + path.string() + ": " + message);
  }
}

void read_mask_png(const fs::path& path, EchogramRecord& record) {
  if (!fs::exists(path)) throw IoError("mask not found: " + path.string());
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    throw DataError("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr) == 0) {
    const std::string message = image.message;
    png_image_free(&image);
    throw DataError("cannot decode PNG " + path.string() + ": " + message);
  }
  record.width = image.width;
  record.height = image.height;
  record.mask.resize(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) record.mask[i] = pixels[i] >= 128 ? 1 : 0;
}

void write_geo_csv(const fs::path& path, const std::vector<GeoCoordinate>& geo) {
  std::string text = "lat,lon,elev\n";
  for (const auto& c : geo) {
    text += eval::format_double(c.latitude) + "," + eval::format_double(c.longitude) + "," +
            eval::format_double(c.elevation) + "\n";
  }
  io::write_text(path, text);
}

std::vector<GeoCoordinate> read_geo_csv(const fs::path& path, std::size_t expected_rows) {
  if (!fs::exists(path)) throw IoError("geo file not found: " + path.string());
  std::istringstream in(io::read_text(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != "lat,lon,elev") {
    throw DataError(path.string() + ": expected header 'lat,lon,elev'");
  }
  std::vector<GeoCoordinate> geo;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::string_view row(line);
    const auto c1 = row.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
    if (c2 == std::string_view::npos || row.find(',', c2 + 1) != std::string_view::npos) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 3 comma-separated values");
    }
    GeoCoordinate c{parse_number(row.substr(0, c1), path, line_no),
                    parse_number(row.substr(c1 + 1, c2 - c1 - 1), path, line_no),
                    parse_number(row.substr(c2 + 1), path, line_no)};
    try {
      validate_coordinate(c);
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    geo.push_back(c);
  }
  if (geo.size() != expected_rows) {
    throw DataError(path.string() + ": " + std::to_string(geo.size()) + " coordinate rows, expected " +
                    std::to_string(expected_rows));
  }
  return geo;
}

EchogramRecord load_record(const Manifest& manifest, const ManifestEntry& entry) {
  EchogramRecord rec;
  rec.id = entry.id;
  read_mask_png(manifest.root / entry.mask, rec);
  rec.geo = read_geo_csv(manifest.root / entry.geo, manifest.columns);
  validate_record(rec, manifest.columns);
  return rec;
}

void write_corpus(const fs::path& directory, const std::vector<EchogramRecord>& records, std::size_t columns) {
  std::error_code ec;
  fs::create_directories(directory / "masks", ec);
  fs::create_directories(directory / "geo", ec);
  if (ec) throw IoError("cannot create corpus directories under " + directory.string() + ": " + ec.message());
  Manifest m;
  m.root = directory;
  m.columns = columns;
  for (const auto& r : records) {
    ManifestEntry e{r.id, fs::path("masks") / (r.id + ".png"), fs::path("geo") / (r.id + ".csv")};
    write_mask_png(directory / e.mask, r);
    write_geo_csv(directory / e.geo, r.geo);
    m.records.push_back(std::move(e));
  }
  write_manifest(directory / "manifest.json", m);
}

// ---- prepared datasets ----------------------------------------------------

namespace {

Json prepared_header(const PreparedDataset& d) {
  Json j;
  j["format"] = kPreparedFormat;
  j["version"] = 1;
  j["trial"] = d.trial;
  j["seed"] = d.seed;
  j["distance_mode"] = distance_mode_name(d.edges.mode);
  j["coincident_cap"] = d.edges.coincident_cap;
  j["statistics_scope"] = statistics_scope_name(d.scope);
  j["feature_stats"] = {{"mean", d.feature_stats.mean},
                        {"stddev", d.feature_stats.stddev},
                        {"degenerate", d.feature_stats.degenerate}};
  j["adjacency_stats"] = {{"min", d.adjacency_stats.min},
                          {"max", d.adjacency_stats.max},
                          {"degenerate", d.adjacency_stats.degenerate}};
  j["split"] = {{"train", d.split.train}, {"validation", d.split.validation}, {"test", d.split.test}};
  j["nodes"] = d.node_count();
  j["feature_years"] = kFeatureYears;
  j["target_years"] = kTargetYears;
  return j;
}

std::vector<double> flat_coordinates(const TemporalGraphSequence& s) {
  std::vector<double> out;
  for (const auto& c : s.coordinates) {
    out.push_back(c.latitude);
    out.push_back(c.longitude);
    out.push_back(c.elevation);
  }
  return out;
}

void finish_sequence(TemporalGraphSequence& s, const PreparedDataset& d) {
  s.adjacency = build_adjacency(s.coordinates, d.edges);
  apply_adjacency_minmax(s.adjacency, d.adjacency_stats);
}

}  // namespace

void write_prepared(const fs::path& path, const PreparedDataset& data, training::FileFormat format) {
  Json header = prepared_header(data);
  Json sequences = Json::array();
  io::BinaryContainer container;
  for (const auto& s : data.sequences) {
    Json js;
    js["id"] = s.record_id;
    if (format == training::FileFormat::json) {
      js["coordinates"] = flat_coordinates(s);
      Json graphs = Json::array();
      for (const auto& g : s.graphs) graphs.push_back(g.features.storage());
      js["features"] = std::move(graphs);
      js["targets"] = s.targets.storage();
    } else {
      const auto coords = flat_coordinates(s);
      container.payload.insert(container.payload.end(), coords.begin(), coords.end());
      for (const auto& g : s.graphs) {
        container.payload.insert(container.payload.end(), g.features.storage().begin(), g.features.storage().end());
      }
      container.payload.insert(container.payload.end(), s.targets.storage().begin(), s.targets.storage().end());
    }
    sequences.push_back(std::move(js));
  }
  header["sequences"] = std::move(sequences);
  if (format == training::FileFormat::json) {
    io::write_text(path, header.dump() + "\n");
  } else {
    container.header = std::move(header);
    io::write_container(path, kPreparedMagic, container);
  }
}

PreparedDataset read_prepared(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("prepared dataset not found: " + path.string());
  const bool binary = io::has_magic(path, kPreparedMagic);
  io::BinaryContainer container;
  if (binary) {
    container = io::read_container(path, kPreparedMagic);
  } else {
    container.header = io::read_json(path);
  }
  const Json& j = container.header;
  PreparedDataset d;
  try {
    if (j.at("format").get<std::string>() != kPreparedFormat) throw DataError(path.string() + ": not a prepared dataset");
    d.trial = j.at("trial").get<std::size_t>();
    d.seed = j.at("seed").get<std::uint64_t>();
    d.edges.mode = parse_distance_mode(j.at("distance_mode").get<std::string>());
    d.edges.coincident_cap = j.at("coincident_cap").get<double>();
    d.scope = parse_statistics_scope(j.at("statistics_scope").get<std::string>());
    const Json& fs_json = j.at("feature_stats");
    d.feature_stats.mean = fs_json.at("mean").get<std::array<double, kNodeFeatures>>();
    d.feature_stats.stddev = fs_json.at("stddev").get<std::array<double, kNodeFeatures>>();
    d.feature_stats.degenerate = fs_json.at("degenerate").get<std::array<bool, kNodeFeatures>>();
    const Json& as = j.at("adjacency_stats");
    d.adjacency_stats = MinMaxStats{as.at("min").get<double>(), as.at("max").get<double>(),
                                    as.at("degenerate").get<bool>()};
    d.split.trial = d.trial;
    d.split.train = j.at("split").at("train").get<std::vector<std::string>>();
    d.split.validation = j.at("split").at("validation").get<std::vector<std::string>>();
    d.split.test = j.at("split").at("test").get<std::vector<std::string>>();
    const std::size_t n = j.at("nodes").get<std::size_t>();
    if (j.at("feature_years").get<std::size_t>() != kFeatureYears ||
        j.at("target_years").get<std::size_t>() != kTargetYears) {
      throw DataError(path.string() + ": unsupported year layout");
    }
    std::size_t offset = 0;
    const auto take = [&](std::size_t count) {
      if (offset + count > container.payload.size()) throw DataError(path.string() + ": payload too short");
      std::vector<double> out(container.payload.begin() + static_cast<std::ptrdiff_t>(offset),
                              container.payload.begin() + static_cast<std::ptrdiff_t>(offset + count));
      offset += count;
      return out;
    };
    for (const auto& js : j.at("sequences")) {
      TemporalGraphSequence s;
      s.record_id = js.at("id").get<std::string>();
      std::vector<double> coords;
      std::vector<std::vector<double>> graphs;
      std::vector<double> targets;
      if (binary) {
        coords = take(3 * n);
        for (std::size_t g = 0; g < kFeatureYears; ++g) graphs.push_back(take(n * kNodeFeatures));
        targets = take(n * kTargetYears);
      } else {
        coords = js.at("coordinates").get<std::vector<double>>();
        graphs = js.at("features").get<std::vector<std::vector<double>>>();
        targets = js.at("targets").get<std::vector<double>>();
      }
      if (coords.size() != 3 * n || graphs.size() != kFeatureYears) {
        throw DataError(path.string() + ": sequence '" + s.record_id + "' has inconsistent extents");
      }
      for (std::size_t i = 0; i < n; ++i) s.coordinates.push_back({coords[3 * i], coords[3 * i + 1], coords[3 * i + 2]});
      for (std::size_t g = 0; g < kFeatureYears; ++g) {
        s.graphs.push_back(FeatureGraph{kFirstFeatureYear + static_cast<int>(g),
                                        Tensor(Shape{n, kNodeFeatures}, std::move(graphs[g]))});
      }
      s.targets = Tensor(Shape{n, kTargetYears}, std::move(targets));
      finish_sequence(s, d);
      d.sequences.push_back(std::move(s));
    }
    if (binary && offset != container.payload.size()) throw DataError(path.string() + ": trailing payload values");
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": malformed prepared dataset: " + e.what());
  } catch (const DimensionError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  d.reindex();
  d.select(d.split.train);
  d.select(d.split.validation);
  d.select(d.split.test);
  return d;
}

std::string prepared_file_name(std::size_t trial, training::FileFormat format) {
  return "trial_" + std::to_string(trial) + (format == training::FileFormat::json ? ".json" : ".bin");
}

fs::path find_prepared(const fs::path& directory, std::size_t trial) {
  for (auto format : {training::FileFormat::json, training::FileFormat::binary}) {
    const fs::path p = directory / prepared_file_name(trial, format);
    if (fs::exists(p)) return p;
  }
  throw IoError("no prepared dataset for trial " + std::to_string(trial) + " in " + directory.string());
}

}  // namespace icelayer::corpus
