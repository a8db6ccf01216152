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

#include "icelayer/training.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "icelayer/errors.hpp"
#include "icelayer/eval.hpp"
#include "icelayer/io.hpp"

namespace icelayer::training {

CheckpointPolicy parse_checkpoint_policy(std::string_view name) {
  if (name == "final") return CheckpointPolicy::final;
  if (name == "best_val") return CheckpointPolicy::best_val;
  throw ConfigError("unknown checkpoint policy '" + std::string(name) + "' (final|best_val)");
}

std::string_view checkpoint_policy_name(CheckpointPolicy policy) {
  return policy == CheckpointPolicy::final ? "final" : "best_val";
}

WeightDecayMode parse_weight_decay_mode(std::string_view name) {
  if (name == "coupled") return WeightDecayMode::coupled;
  if (name == "decoupled") return WeightDecayMode::decoupled;
  throw ConfigError("unknown weight decay mode '" + std::string(name) + "' (coupled|decoupled)");
}

std::string_view weight_decay_mode_name(WeightDecayMode mode) {
  return mode == WeightDecayMode::coupled ? "coupled" : "decoupled";
}

FileFormat parse_file_format(std::string_view name) {
  if (name == "json") return FileFormat::json;
  if (name == "binary") return FileFormat::binary;
  throw ConfigError("unknown file format '" + std::string(name) + "' (json|binary)");
}

std::string_view file_format_name(FileFormat format) { return format == FileFormat::json ? "json" : "binary"; }

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(lr0 > 0.0)) throw ConfigError("lr0 must be positive");
  if (halving_period < 1) throw ConfigError("halving_period must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be nonnegative");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

double lr_at_epoch(std::size_t epoch, const TrainConfig& config) {
  return config.lr0 * std::ldexp(1.0, -static_cast<int>(epoch / config.halving_period));
}

AdamState make_adam_state(std::span<Parameter* const> params) {
  AdamState state;
  for (const Parameter* p : params) {
    state.m.push_back(Tensor::zeros_like(p->value));
    state.v.push_back(Tensor::zeros_like(p->value));
  }
  return state;
}

void adam_step(std::span<Parameter* const> params, AdamState& state, double lr, const TrainConfig& config) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ContractError("Adam state does not match the parameter list");
  }
  for (const Parameter* p : params) {
    if (!p->grad.all_finite()) throw NumericError("non-finite gradient in parameter '" + p->name + "'");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  const bool coupled = config.weight_decay_mode == WeightDecayMode::coupled;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      double g = p.grad[i];
      if (coupled) {
        g += config.weight_decay * p.value[i];
      } else {
        p.value[i] -= lr * config.weight_decay * p.value[i];
      }
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

Var mse_loss(Var pred, const Tensor& target) { return diff::mean_squared_error(pred, target); }

namespace seeds {

std::uint64_t split(std::uint64_t master, std::size_t trial) { return master + trial; }

std::uint64_t init(std::uint64_t master, std::size_t trial, ModelKind kind) {
  return master + 1000 + 10 * trial + static_cast<std::uint64_t>(kind);
}

std::uint64_t shuffle(std::uint64_t master, std::size_t trial, ModelKind kind) {
  return master + 2000 + 10 * trial + static_cast<std::uint64_t>(kind);
}

std::uint64_t dropout(std::uint64_t master, std::size_t trial, ModelKind kind) {
  return master + 3000 + 10 * trial + static_cast<std::uint64_t>(kind);
}

}  // namespace seeds

// ---- checkpoints ----------------------------------------------------------

Checkpoint make_checkpoint(const Model& model, std::uint64_t master_seed, std::size_t trial, std::size_t epoch) {
  Checkpoint c{model.config(), master_seed, model.seed(), trial, epoch, {}};
  for (const auto& p : model.parameters()) c.parameters.push_back(NamedTensor{p->name, p->value});
  return c;
}

Model load_model(const Checkpoint& checkpoint) {
  Model model(checkpoint.model, checkpoint.init_seed);
  if (checkpoint.parameters.size() != model.parameters().size()) {
    throw DataError("checkpoint holds " + std::to_string(checkpoint.parameters.size()) + " parameters, model has " +
                    std::to_string(model.parameters().size()));
  }
  for (const auto& named : checkpoint.parameters) {
    Parameter* p = model.parameters().find(named.name);
    if (p == nullptr) throw DataError("checkpoint parameter '" + named.name + "' unknown to the model");
    if (p->value.shape() != named.value.shape()) {
      throw DataError("checkpoint parameter '" + named.name + "' has shape " + shape_string(named.value.shape()) +
                      ", model expects " + shape_string(p->value.shape()));
    }
    p->value = named.value;
  }
  return model;
}

namespace {

constexpr std::string_view kCheckpointMagic = "ICECKPT1";
constexpr std::string_view kCheckpointFormat = "icelayer-checkpoint";

io::Json checkpoint_header(const Checkpoint& c) {
  io::Json j;
  j["format"] = kCheckpointFormat;
  j["version"] = 1;
  j["model"] = io::model_config_to_json(c.model);
  j["master_seed"] = c.master_seed;
  j["init_seed"] = c.init_seed;
  j["trial"] = c.trial;
  j["epoch"] = c.epoch;
  return j;
}

Checkpoint checkpoint_from_header(const io::Json& j, const std::filesystem::path& path) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) throw DataError(path.string() + ": not a checkpoint");
    Checkpoint c;
    c.model = io::model_config_from_json(j.at("model"));
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    c.init_seed = j.at("init_seed").get<std::uint64_t>();
    c.trial = j.at("trial").get<std::size_t>();
    c.epoch = j.at("epoch").get<std::size_t>();
    return c;
  } catch (const io::Json::exception& e) {
    throw DataError(path.string() + ": malformed checkpoint header: " + e.what());
  }
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint, FileFormat format) {
  io::Json header = checkpoint_header(checkpoint);
  if (format == FileFormat::json) {
    io::Json params = io::Json::array();
    for (const auto& p : checkpoint.parameters) {
      params.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"values", p.value.storage()}});
    }
    header["parameters"] = std::move(params);
    io::write_json(path, header);
    return;
  }
  io::BinaryContainer container;
  io::Json params = io::Json::array();
  for (const auto& p : checkpoint.parameters) {
    params.push_back({{"name", p.name}, {"shape", p.value.shape()}});
    container.payload.insert(container.payload.end(), p.value.storage().begin(), p.value.storage().end());
  }
  header["parameters"] = std::move(params);
  container.header = std::move(header);
  io::write_container(path, kCheckpointMagic, container);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("checkpoint not found: " + path.string());
  try {
    if (io::has_magic(path, kCheckpointMagic)) {
      const io::BinaryContainer container = io::read_container(path, kCheckpointMagic);
      Checkpoint c = checkpoint_from_header(container.header, path);
      std::size_t offset = 0;
      for (const auto& p : container.header.at("parameters")) {
        Shape shape = p.at("shape").get<Shape>();
        const std::size_t n = shape_size(shape);
        if (offset + n > container.payload.size()) throw DataError(path.string() + ": payload too short");
        std::vector<double> values(container.payload.begin() + static_cast<std::ptrdiff_t>(offset),
                                   container.payload.begin() + static_cast<std::ptrdiff_t>(offset + n));
        offset += n;
        c.parameters.push_back(NamedTensor{p.at("name").get<std::string>(), Tensor(std::move(shape), std::move(values))});
      }
      if (offset != container.payload.size()) throw DataError(path.string() + ": trailing payload values");
      return c;
    }
    const io::Json j = io::read_json(path);
    Checkpoint c = checkpoint_from_header(j, path);
    for (const auto& p : j.at("parameters")) {
      c.parameters.push_back(NamedTensor{p.at("name").get<std::string>(),
                                         Tensor(p.at("shape").get<Shape>(), p.at("values").get<std::vector<double>>())});
    }
    return c;
  } catch (const io::Json::exception& e) {
    throw DataError(path.string() + ": malformed checkpoint: " + e.what());
  } catch (const DimensionError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---- trials ---------------------------------------------------------------

namespace {

double validation_rmse(Model& model, std::span<const TemporalGraphSequence* const> sequences) {
  std::vector<Tensor> preds, targets;
  preds.reserve(sequences.size());
  targets.reserve(sequences.size());
  for (const auto* s : sequences) {
    preds.push_back(model.predict(*s));
    targets.push_back(s->targets);
  }
  return eval::rmse(eval::stack_rows(preds), eval::stack_rows(targets)).total;
}

}  // namespace

TrialResult run_trial(const ModelConfig& model_config, const PreparedDataset& data, const TrainConfig& config,
                      const EpochObserver& observer) {
  config.validate();
  if (data.split.train.empty()) throw ConfigError("trial " + std::to_string(data.trial) + " has an empty training split");
  if (data.split.validation.empty()) {
    throw ConfigError("trial " + std::to_string(data.trial) + " has an empty validation split");
  }
  const std::size_t trial = data.trial;
  const ModelKind kind = model_config.kind;
  Model model(model_config, seeds::init(config.seed, trial, kind));
  const std::vector<Parameter*> params = model.parameters().pointers();
  AdamState state = make_adam_state(params);
  const auto train = data.select(data.split.train);
  const auto validation = data.select(data.split.validation);

  Rng shuffle_rng(seeds::shuffle(config.seed, trial, kind));
  Rng dropout_rng(seeds::dropout(config.seed, trial, kind));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrialResult result;
  result.train_loss.reserve(config.epochs);
  result.val_rmse.reserve(config.epochs);
  double best = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best_values;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at_epoch(epoch, config);
    shuffle_rng.shuffle(std::span(order));
    double total = 0.0;
    for (std::size_t idx : order) {
      const TemporalGraphSequence& seq = *train[idx];
      model.parameters().zero_grad();
      diff::Tape tape;
      Var pred = model.forward(tape, seq, models::ForwardMode{true, &dropout_rng});
      Var loss = mse_loss(pred, seq.targets);
      const double value = loss.value().item();
      if (!std::isfinite(value)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1) + " on sequence '" +
                           seq.record_id + "'");
      }
      tape.backward(loss);
      adam_step(params, state, lr, config);
      result.optimizer_steps += 1;
      total += value;
    }
    const double train_loss = total / static_cast<double>(train.size());
    const double val = validation_rmse(model, validation);
    result.train_loss.push_back(train_loss);
    result.val_rmse.push_back(val);
    result.learning_rate.push_back(lr);
    if (config.checkpoint_policy == CheckpointPolicy::best_val && val < best) {
      best = val;
      best_values = model.parameters().snapshot();
      result.selected_epoch = epoch + 1;
    }
    if (observer) observer(epoch, train_loss, val);
  }
  if (config.checkpoint_policy == CheckpointPolicy::final || best_values.empty()) {
    result.selected_epoch = config.epochs;
  } else {
    model.parameters().restore(best_values);
  }
  result.checkpoint = make_checkpoint(model, config.seed, trial, result.selected_epoch);
  return result;
}

void write_training_log(const std::filesystem::path& path, const TrialResult& result, const TrainConfig& config) {
  std::string text = "epoch,train_loss,val_rmse,lr\n";
  for (std::size_t e = 0; e < result.train_loss.size(); ++e) {
    text += std::to_string(e + 1) + "," + eval::format_double(result.train_loss[e]) + "," +
            eval::format_double(result.val_rmse[e]) + "," + eval::format_double(lr_at_epoch(e, config)) + "\n";
  }
  io::write_text(path, text);
}

}  // namespace icelayer::training
