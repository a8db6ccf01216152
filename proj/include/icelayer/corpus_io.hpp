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

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "icelayer/dataset.hpp"
#include "icelayer/prepared.hpp"
#include "icelayer/training.hpp"

namespace icelayer::corpus {

// manifest.json:
//   {"format": "icelayer-corpus", "version": 1, "columns": 256,
//    "records": [{"id": "...", "mask": "masks/<id>.png", "geo": "geo/<id>.csv"}]}
// Paths are relative to the manifest's directory.
struct ManifestEntry {
  std::string id;
  std::filesystem::path mask;
  std::filesystem::path geo;
};

struct Manifest {
  std::filesystem::path root;
  std::size_t columns = kEchogramColumns;
  std::vector<ManifestEntry> records;
};

Manifest read_manifest(const std::filesystem::path& manifest_path);
void write_manifest(const std::filesystem::path& manifest_path, const Manifest& manifest);

// 8-bit grayscale PNG, 0 = background, 255 = layer top.
void write_mask_png(const std::filesystem::path& path, const EchogramRecord& record);
// Pixels >= 128 become layer tops. Colour and 16-bit images are reduced to
// 8-bit gray.
void read_mask_png(const std::filesystem::path& path, EchogramRecord& record);

// CSV with header `lat,lon,elev` and one row per column.
void write_geo_csv(const std::filesystem::path& path, const std::vector<GeoCoordinate>& geo);
std::vector<GeoCoordinate> read_geo_csv(const std::filesystem::path& path, std::size_t expected_rows);

EchogramRecord load_record(const Manifest& manifest, const ManifestEntry& entry);

// Writes records under `directory` (masks/, geo/, manifest.json).
void write_corpus(const std::filesystem::path& directory, const std::vector<EchogramRecord>& records,
                  std::size_t columns);

// Prepared trial files. JSON holds every array inline; the binary form is an
// ICEPREP1 container whose header mirrors the JSON minus the arrays. The
// normalized adjacency is rebuilt on load from the coordinates and the stored
// min/max statistics.
void write_prepared(const std::filesystem::path& path, const PreparedDataset& data, training::FileFormat format);
PreparedDataset read_prepared(const std::filesystem::path& path);

std::string prepared_file_name(std::size_t trial, training::FileFormat format);
// Finds trial_<k>.json or trial_<k>.bin inside `directory`.
std::filesystem::path find_prepared(const std::filesystem::path& directory, std::size_t trial);

}  // namespace icelayer::corpus
