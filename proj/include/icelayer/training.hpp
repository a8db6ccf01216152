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
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icelayer/autodiff.hpp"
#include "icelayer/models.hpp"
#include "icelayer/prepared.hpp"

namespace icelayer::training {

using diff::Parameter;
using diff::Var;
using models::Model;
using models::ModelConfig;
using models::ModelKind;

enum class CheckpointPolicy { final, best_val };
enum class WeightDecayMode { coupled, decoupled };

CheckpointPolicy parse_checkpoint_policy(std::string_view name);
std::string_view checkpoint_policy_name(CheckpointPolicy policy);
WeightDecayMode parse_weight_decay_mode(std::string_view name);
std::string_view weight_decay_mode_name(WeightDecayMode mode);

struct TrainConfig {
  std::size_t epochs = 500;
  double lr0 = 0.01;
  std::size_t halving_period = 125;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  CheckpointPolicy checkpoint_policy = CheckpointPolicy::best_val;
  WeightDecayMode weight_decay_mode = WeightDecayMode::coupled;

  void validate() const;
};

// lr0 * 0.5^floor(epoch / halving_period)
double lr_at_epoch(std::size_t epoch, const TrainConfig& config = {});

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::size_t step = 0;
};

AdamState make_adam_state(std::span<Parameter* const> params);

// One Adam update with weight decay. Coupled mode adds wd * theta to the
// gradient before the moment updates; decoupled mode subtracts lr * wd * theta
// from the parameter directly.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr, const TrainConfig& config);

Var mse_loss(Var pred, const Tensor& target);

// Seeds derived from the master seed, one role each.
namespace seeds {
std::uint64_t split(std::uint64_t master, std::size_t trial);
std::uint64_t init(std::uint64_t master, std::size_t trial, ModelKind kind);
std::uint64_t shuffle(std::uint64_t master, std::size_t trial, ModelKind kind);
std::uint64_t dropout(std::uint64_t master, std::size_t trial, ModelKind kind);
}  // namespace seeds

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct Checkpoint {
  ModelConfig model;
  std::uint64_t master_seed = 0;
  std::uint64_t init_seed = 0;
  std::size_t trial = 0;
  std::size_t epoch = 0;  // 1-based epoch the weights were taken from
  std::vector<NamedTensor> parameters;
};

Checkpoint make_checkpoint(const Model& model, std::uint64_t master_seed, std::size_t trial, std::size_t epoch);
// Rebuilds the model and overwrites every parameter by name.
Model load_model(const Checkpoint& checkpoint);

enum class FileFormat { json, binary };
FileFormat parse_file_format(std::string_view name);
std::string_view file_format_name(FileFormat format);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint, FileFormat format);
Checkpoint read_checkpoint(const std::filesystem::path& path);

struct TrialResult {
  Checkpoint checkpoint;
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_rmse;    // per epoch
  std::vector<double> learning_rate;
  std::size_t selected_epoch = 0;  // 1-based
  std::size_t optimizer_steps = 0;
};

// Called after every epoch with (epoch index, train loss, validation RMSE).
using EpochObserver = std::function<void(std::size_t, double, double)>;

// Batch-size-1 training over the trial's training split with per-epoch
// shuffling, validation RMSE after every epoch, and checkpoint selection per
// config.checkpoint_policy.
TrialResult run_trial(const ModelConfig& model_config, const PreparedDataset& data, const TrainConfig& config,
                      const EpochObserver& observer = {});

// epoch,train_loss,val_rmse,lr
void write_training_log(const std::filesystem::path& path, const TrialResult& result, const TrainConfig& config);

}  // namespace icelayer::training
