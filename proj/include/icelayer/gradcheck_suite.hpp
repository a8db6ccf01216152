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
#include <cstdint>
#include <string>
#include <vector>

#include "icelayer/geograph.hpp"

namespace icelayer::verify {

struct GradcheckRow {
  std::string component;
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t scalars = 0;
  bool passed = false;
};

struct GradcheckOptions {
  double step = 1e-6;
  double tolerance = 1e-5;
  std::uint64_t seed = 1;
  // Adds a case whose backward is deliberately wrong; the suite must flag it.
  bool include_faulty_fixture = false;
};

// Runs the finite-difference check over every differentiable operation, every
// layer type and the three full models (dropout off). One row per component.
std::vector<GradcheckRow> run_gradcheck_suite(const GradcheckOptions& options = {});

// Random normalized sequence on `nodes` nodes: z-scored-looking features, a
// symmetric [0, 1] adjacency with zero diagonal (minmax state) and targets
// around 10 px.
TemporalGraphSequence toy_sequence(std::size_t nodes, std::uint64_t seed);

}  // namespace icelayer::verify
