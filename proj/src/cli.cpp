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

#include "icelayer/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "icelayer/corpus_io.hpp"
#include "icelayer/errors.hpp"
#include "icelayer/eval.hpp"
#include "icelayer/gradcheck_suite.hpp"
#include "icelayer/io.hpp"
#include "icelayer/training.hpp"

namespace icelayer::cli {

namespace fs = std::filesystem;
using io::Json;
using models::ModelKind;

namespace {

enum class Kind { text, count, real, boolean, selector };

struct Key {
  std::string name;
  Kind kind;
  Json fallback;
  std::string help;
};

const std::vector<Key>& key_table() {
  static const std::vector<Key> table = {
      {"seed", Kind::count, 0, "master seed"},
      {"out", Kind::text, "", "output directory"},
      {"corpus", Kind::text, "corpus", "corpus directory or manifest.json"},
      {"data", Kind::text, "prepared", "prepared-dataset directory"},
      {"checkpoints", Kind::text, "", "checkpoint directory (default <out>/checkpoints)"},
      {"format", Kind::text, "json", "file format for prepared data and checkpoints: json|binary"},
      {"records", Kind::count, 20, "number of synthetic records"},
      {"layers", Kind::count, 16, "layers per synthetic record"},
      {"short_records", Kind::count, 0, "records drawn with short_layers layers instead"},
      {"short_layers", Kind::count, 12, "layer count of the short records"},
      {"columns", Kind::count, kEchogramColumns, "columns (graph nodes) per record"},
      {"origin_latitude", Kind::real, 72.0, "latitude of the first flight line"},
      {"origin_longitude", Kind::real, -40.0, "longitude of the first flight line"},
      {"heading_deg", Kind::real, 35.0, "flight heading in degrees"},
      {"noise_px", Kind::real, 1.5, "per-column thickness noise (sd, px)"},
      {"persistence", Kind::real, 0.8, "AR(1) coefficient of the yearly record anomaly"},
      {"shock_px", Kind::real, 1.0, "AR(1) innovation sd (px)"},
      {"along_track_px", Kind::real, 2.0, "typical amplitude of the along-track variation (px)"},
      {"distance_mode", Kind::text, "standard", "edge weight formula: standard|paper_verbatim"},
      {"statistics_scope", Kind::text, "all", "normalization statistics over: all|train_only"},
      {"model", Kind::text, "all", "gat_lstm|gcn|lstm|all"},
      {"trial", Kind::selector, "all", "0..4 or all"},
      {"epochs", Kind::count, 500, "training epochs"},
      {"lr0", Kind::real, 0.01, "initial learning rate"},
      {"halving_period", Kind::count, 125, "epochs between learning-rate halvings"},
      {"weight_decay", Kind::real, 1e-4, "L2 weight decay"},
      {"weight_decay_mode", Kind::text, "coupled", "coupled|decoupled"},
      {"checkpoint_policy", Kind::text, "best_val", "final|best_val"},
      {"hidden", Kind::count, 48, "recurrent / graph hidden width"},
      {"dropout", Kind::real, 0.2, "dropout rate in the regression head"},
      {"attention_heads", Kind::count, 1, "attention heads per GAT layer"},
      {"leaky_slope", Kind::real, 0.2, "negative slope of the attention LeakyReLU"},
      {"edge_bias", Kind::text, "none", "attention edge bias: none|log_weight"},
      {"jobs", Kind::count, 1, "parallel training workers for compare"},
      {"tolerance", Kind::real, 1e-5, "gradient-check pass threshold"},
      {"with_faulty_fixture", Kind::boolean, false, "add a case with a wrong derivative"},
  };
  return table;
}

const Key& key(const std::string& name) {
  for (const auto& k : key_table()) {
    if (k.name == name) return k;
  }
  throw ContractError("unknown configuration key '" + name + "'");
}

const std::vector<std::string> kTrainKeys = {
    "seed", "data", "out", "format", "model", "trial", "epochs", "lr0", "halving_period", "weight_decay",
    "weight_decay_mode", "checkpoint_policy", "hidden", "dropout", "attention_heads", "leaky_slope", "edge_bias"};

std::vector<std::string> command_keys(const std::string& command) {
  if (command == "synth") {
    return {"seed", "out", "records", "layers", "short_records", "short_layers", "columns", "origin_latitude",
            "origin_longitude", "heading_deg", "noise_px", "persistence", "shock_px", "along_track_px"};
  }
  if (command == "prepare") return {"seed", "corpus", "out", "format", "distance_mode", "statistics_scope"};
  if (command == "train") return kTrainKeys;
  if (command == "evaluate") return {"data", "checkpoints", "out", "model", "trial"};
  if (command == "compare") {
    auto keys = kTrainKeys;
    keys.push_back("jobs");
    return keys;
  }
  if (command == "gradcheck") return {"seed", "out", "tolerance", "with_faulty_fixture"};
  throw ContractError("unknown command '" + command + "'");
}

std::string default_out(const std::string& command) {
  if (command == "synth") return "corpus";
  if (command == "prepare") return "prepared";
  if (command == "gradcheck") return "";
  return "runs";
}

std::string flag_name(const std::string& key) {
  std::string s = "--" + key;
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

std::string env_name(const std::string& key) {
  std::string s = kEnvPrefix;
  for (char c : key) s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// Converts a textual override into the key's JSON type.
Json from_text(const Key& k, const std::string& text, const std::string& origin) {
  const auto bad = [&](const std::string& what) {
    return ConfigError(origin + ": '" + text + "' is not " + what + " (key " + k.name + ")");
  };
  switch (k.kind) {
    case Kind::text:
      return text;
    case Kind::count: {
      std::uint64_t v = 0;
      const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size() || text.empty()) throw bad("a non-negative integer");
      return v;
    }
    case Kind::real: {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size() || text.empty()) throw bad("a number");
      return v;
    }
    case Kind::boolean:
      if (text == "1" || text == "true" || text == "yes") return true;
      if (text == "0" || text == "false" || text == "no") return false;
      throw bad("a boolean");
    case Kind::selector: {
      if (text == "all") return "all";
      std::uint64_t v = 0;
      const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size() || text.empty()) throw bad("an index or 'all'");
      return v;
    }
  }
  throw bad("valid");
}

// Type-checks a value coming from the JSON config file.
Json from_config(const Key& k, const Json& v, const std::string& origin) {
  const auto bad = [&](const std::string& what) {
    return ConfigError(origin + ": key " + k.name + " must be " + what + ", got " + v.dump());
  };
  switch (k.kind) {
    case Kind::text:
      if (!v.is_string()) throw bad("a string");
      return v;
    case Kind::count:
      if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0)) {
        throw bad("a non-negative integer");
      }
      return v.get<std::uint64_t>();
    case Kind::real:
      if (!v.is_number()) throw bad("a number");
      return v.get<double>();
    case Kind::boolean:
      if (!v.is_boolean()) throw bad("a boolean");
      return v;
    case Kind::selector:
      if (v.is_string()) return from_text(k, v.get<std::string>(), origin);
      if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
      throw bad("an index or \"all\"");
  }
  throw bad("valid");
}

struct Invocation {
  std::string command;
  std::optional<std::string> config_path;
  bool force = false;
  std::map<std::string, std::string> flags;  // key -> raw text, only flags given
  std::map<std::string, bool> switches;       // boolean flags given
};

Json effective_config(const Invocation& inv) {
  const auto keys = command_keys(inv.command);
  Json cfg = Json::object();
  for (const auto& name : keys) {
    cfg[name] = name == "out" ? Json(default_out(inv.command)) : key(name).fallback;
  }
  if (inv.config_path) {
    const Json file = io::read_json(*inv.config_path);
    if (!file.is_object()) throw ConfigError(*inv.config_path + ": config must be a JSON object");
    for (const auto& [name, value] : file.items()) {
      const auto& k = key(name);  // unknown keys are rejected
      if (cfg.contains(name)) cfg[name] = from_config(k, value, *inv.config_path);
    }
  }
  for (const auto& name : keys) {
    if (const char* env = std::getenv(env_name(name).c_str())) {
      cfg[name] = from_text(key(name), env, env_name(name));
    }
  }
  for (const auto& [name, text] : inv.flags) cfg[name] = from_text(key(name), text, flag_name(name));
  for (const auto& [name, on] : inv.switches) {
    if (on) cfg[name] = true;
  }
  return cfg;
}

std::string str(const Json& cfg, const char* name) { return cfg.at(name).get<std::string>(); }
std::size_t count(const Json& cfg, const char* name) { return cfg.at(name).get<std::size_t>(); }
double real(const Json& cfg, const char* name) { return cfg.at(name).get<double>(); }

std::vector<ModelKind> selected_models(const Json& cfg) {
  const std::string m = str(cfg, "model");
  if (m == "all") return {std::begin(models::kAllModelKinds), std::end(models::kAllModelKinds)};
  return {models::parse_model_kind(m)};
}

std::vector<std::size_t> selected_trials(const Json& cfg) {
  const Json& t = cfg.at("trial");
  if (t.is_string()) {
    std::vector<std::size_t> all(kTrials);
    for (std::size_t i = 0; i < kTrials; ++i) all[i] = i;
    return all;
  }
  const auto k = t.get<std::size_t>();
  if (k >= kTrials) throw ConfigError("--trial must be in 0.." + std::to_string(kTrials - 1) + " or 'all'");
  return {k};
}

models::ModelConfig model_config(const Json& cfg, ModelKind kind) {
  models::ModelConfig mc;
  mc.kind = kind;
  mc.hidden = count(cfg, "hidden");
  mc.dropout = real(cfg, "dropout");
  mc.attention_heads = count(cfg, "attention_heads");
  mc.leaky_slope = real(cfg, "leaky_slope");
  mc.edge_bias = models::parse_edge_bias(str(cfg, "edge_bias"));
  mc.validate();
  return mc;
}

training::TrainConfig train_config(const Json& cfg) {
  training::TrainConfig tc;
  tc.epochs = count(cfg, "epochs");
  tc.lr0 = real(cfg, "lr0");
  tc.halving_period = count(cfg, "halving_period");
  tc.weight_decay = real(cfg, "weight_decay");
  tc.weight_decay_mode = training::parse_weight_decay_mode(str(cfg, "weight_decay_mode"));
  tc.checkpoint_policy = training::parse_checkpoint_policy(str(cfg, "checkpoint_policy"));
  tc.seed = count(cfg, "seed");
  tc.validate();
  return tc;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

bool non_empty_directory(const fs::path& dir) {
  std::error_code ec;
  return fs::is_directory(dir, ec) && !fs::is_empty(dir, ec);
}

void refuse_non_empty(const fs::path& dir, bool force) {
  if (!force && non_empty_directory(dir)) {
    throw ConfigError("output directory " + dir.string() + " is not empty; pass --force to overwrite");
  }
}

void remove_path(const fs::path& p) {
  std::error_code ec;
  fs::remove_all(p, ec);
  if (ec) throw IoError("cannot remove " + p.string() + ": " + ec.message());
}

// Missing inputs are a usage problem rather than a data problem.
fs::path locate_prepared(const fs::path& dir, std::size_t trial) {
  if (!fs::is_directory(dir)) throw ConfigError("prepared-data directory " + dir.string() + " does not exist");
  try {
    return corpus::find_prepared(dir, trial);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
}

std::string run_name(ModelKind kind, std::size_t trial) {
  return std::string(models::model_kind_name(kind)) + "_trial" + std::to_string(trial);
}

std::optional<fs::path> find_checkpoint(const fs::path& dir, ModelKind kind, std::size_t trial) {
  for (const char* ext : {".json", ".bin"}) {
    const fs::path p = dir / (run_name(kind, trial) + ext);
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

std::string checkpoint_ext(training::FileFormat f) { return f == training::FileFormat::json ? ".json" : ".bin"; }

class Console {
 public:
  Console(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}
  void line(const std::string& s) {
    std::lock_guard lock(mu_);
    out_ << s << '\n' << std::flush;
  }
  void error(const std::string& s) {
    std::lock_guard lock(mu_);
    err_ << s << '\n' << std::flush;
  }
  std::ostream& out() { return out_; }

 private:
  std::ostream& out_;
  std::ostream& err_;
  std::mutex mu_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double v, int decimals = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(decimals) << v;
  return s.str();
}

// ---------------------------------------------------------------- synth

int command_synth(const Json& cfg, bool force, Console& con) {
  SyntheticConfig sc;
  sc.records = count(cfg, "records");
  sc.layers = count(cfg, "layers");
  sc.short_records = count(cfg, "short_records");
  sc.short_layers = count(cfg, "short_layers");
  sc.columns = count(cfg, "columns");
  sc.origin_latitude = real(cfg, "origin_latitude");
  sc.origin_longitude = real(cfg, "origin_longitude");
  sc.heading_deg = real(cfg, "heading_deg");
  sc.noise_px = real(cfg, "noise_px");
  sc.persistence = real(cfg, "persistence");
  sc.shock_px = real(cfg, "shock_px");
  sc.along_track_px = real(cfg, "along_track_px");
  sc.seed = count(cfg, "seed");
  sc.validate();
  const fs::path out = str(cfg, "out");
  refuse_non_empty(out, force);
  for (const char* p : {"masks", "geo", "manifest.json"}) remove_path(out / p);
  ensure_directory(out);
  io::write_json(out / "run_config.json", cfg);
  const auto records = generate_synthetic(sc);
  corpus::write_corpus(out, records, sc.columns);
  con.line("wrote " + std::to_string(records.size()) + " records (" + std::to_string(sc.records) + " with " +
           std::to_string(sc.layers) + " layers, " + std::to_string(sc.short_records) + " with " +
           std::to_string(sc.short_layers) + ") to " + (out / "manifest.json").string());
  return 0;
}

// ---------------------------------------------------------------- prepare

int command_prepare(const Json& cfg, bool force, Console& con) {
  fs::path manifest_path = str(cfg, "corpus");
  if (fs::is_directory(manifest_path)) manifest_path /= "manifest.json";
  if (!fs::exists(manifest_path)) throw ConfigError("corpus manifest " + manifest_path.string() + " does not exist");
  const fs::path out = str(cfg, "out");
  refuse_non_empty(out, force);
  const auto format = training::parse_file_format(str(cfg, "format"));
  PrepareOptions options;
  options.seed = count(cfg, "seed");
  options.edges.mode = parse_distance_mode(str(cfg, "distance_mode"));
  options.scope = parse_statistics_scope(str(cfg, "statistics_scope"));

  const corpus::Manifest manifest = corpus::read_manifest(manifest_path);
  std::vector<LabeledRecord> labeled;
  std::map<std::string, std::size_t> reasons;
  Json rejections = Json::array();
  std::vector<std::string> malformed;
  const std::string short_reason = "fewer than " + std::to_string(kRequiredLayers) + " layers";
  for (const auto& entry : manifest.records) {
    EchogramRecord record;
    try {
      record = corpus::load_record(manifest, entry);
    } catch (const Error& e) {
      malformed.push_back(e.what());
      continue;
    }
    try {
      labeled.push_back(label_record(record));
    } catch (const RecordRejected& e) {
      ++reasons[e.reason()];
      rejections.push_back(Json{{"id", entry.id}, {"reason", e.reason()}});
      continue;
    }
    if (labeled.back().thickness.layers < kRequiredLayers) {
      ++reasons[short_reason];
      rejections.push_back(Json{{"id", entry.id},
                                {"reason", short_reason + " (" + std::to_string(labeled.back().thickness.layers) + ")"}});
    }
  }
  if (!malformed.empty()) {
    for (const auto& m : malformed) con.error("error: " + m);
    throw DataError(std::to_string(malformed.size()) + " malformed corpus file(s); nothing written");
  }
  const auto usable = filter_usable(labeled);
  con.line(std::to_string(manifest.records.size()) + " records, " + std::to_string(usable.size()) + " usable, " +
           std::to_string(manifest.records.size() - usable.size()) + " rejected");
  for (const auto& [reason, n] : reasons) con.line("  rejected " + std::to_string(n) + ": " + reason);
  if (usable.empty()) throw DataError("0 usable records in " + manifest_path.string());

  Diagnostics diag;
  const auto trials = prepare_trials(usable, options, &diag);
  ensure_directory(out);
  io::write_json(out / "run_config.json", cfg);
  Json splits = Json::array();
  for (const auto& t : trials) {
    corpus::write_prepared(out / corpus::prepared_file_name(t.trial, format), t, format);
    splits.push_back(Json{{"trial", t.trial},
                          {"train", t.split.train.size()},
                          {"validation", t.split.validation.size()},
                          {"test", t.split.test.size()}});
    con.line("  trial " + std::to_string(t.trial) + ": train " + std::to_string(t.split.train.size()) + " / val " +
             std::to_string(t.split.validation.size()) + " / test " + std::to_string(t.split.test.size()));
  }
  for (const auto& w : diag.warnings()) con.line("warning: " + w);
  Json reason_json = Json::object();
  for (const auto& [reason, n] : reasons) reason_json[reason] = n;
  Json report{{"records", manifest.records.size()},
              {"usable", usable.size()},
              {"rejected", manifest.records.size() - usable.size()},
              {"rejection_reasons", reason_json},
              {"rejections", rejections},
              {"splits", splits},
              {"warnings", diag.warnings()}};
  io::write_json(out / "prepare_report.json", report);
  return 0;
}

// ---------------------------------------------------------------- train / compare

struct TrainTask {
  ModelKind kind;
  std::size_t trial;
};

struct TrainOutcome {
  eval::TrialReport report;
  std::size_t selected_epoch = 0;
};

TrainOutcome train_one(const Json& cfg, const TrainTask& task, const fs::path& out, Console& con) {
  const auto t0 = std::chrono::steady_clock::now();
  const PreparedDataset data = corpus::read_prepared(locate_prepared(str(cfg, "data"), task.trial));
  if (data.trial != task.trial) {
    throw DataError("prepared file for trial " + std::to_string(task.trial) + " holds trial " +
                    std::to_string(data.trial));
  }
  const auto mc = model_config(cfg, task.kind);
  const auto tc = train_config(cfg);
  const auto format = training::parse_file_format(str(cfg, "format"));
  const std::string name = run_name(task.kind, task.trial);
  const std::size_t every = std::max<std::size_t>(1, tc.epochs / 5);
  const auto observer = [&](std::size_t epoch, double loss, double val) {
    if ((epoch + 1) % every == 0 || epoch + 1 == tc.epochs) {
      con.line("[" + name + "] epoch " + std::to_string(epoch + 1) + "/" + std::to_string(tc.epochs) + " loss " +
               fixed(loss, 4) + " val_rmse " + fixed(val, 4));
    }
  };
  const training::TrialResult result = training::run_trial(mc, data, tc, observer);
  training::write_checkpoint(out / "checkpoints" / (name + checkpoint_ext(format)), result.checkpoint, format);
  training::write_training_log(out / "logs" / (name + ".csv"), result, tc);
  models::Model model = training::load_model(result.checkpoint);
  TrainOutcome outcome{eval::evaluate_test(model, data), result.selected_epoch};
  con.line("[" + name + "] done: epoch " + std::to_string(result.selected_epoch) + " kept, test rmse " +
           fixed(outcome.report.total_px, 4) + " px (" + fixed(seconds_since(t0), 1) + " s)");
  return outcome;
}

std::vector<TrainOutcome> run_tasks(const Json& cfg, const std::vector<TrainTask>& tasks, const fs::path& out,
                                    std::size_t jobs, Console& con) {
  ensure_directory(out / "checkpoints");
  ensure_directory(out / "logs");
  std::vector<TrainOutcome> outcomes(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        outcomes[i] = train_one(cfg, tasks[i], out, con);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(jobs, 1, tasks.size());
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return outcomes;
}

std::vector<TrainTask> make_tasks(const Json& cfg) {
  std::vector<TrainTask> tasks;
  for (std::size_t trial : selected_trials(cfg)) {
    for (ModelKind kind : selected_models(cfg)) tasks.push_back({kind, trial});
  }
  return tasks;
}

void print_summary(const eval::AggregateReport& agg, Console& con) {
  con.line("model      total RMSE px      total RMSE cm");
  for (const auto& m : agg.models) {
    std::string name(models::model_kind_name(m.model));
    name.resize(10, ' ');
    con.line(name + " " + eval::format_mean_std(m.mean_total, m.std_total) + "    " +
             eval::format_mean_std(m.mean_total * kCentimetersPerPixel, m.std_total * kCentimetersPerPixel));
  }
}

bool complete(std::span<const eval::TrialReport> reports) {
  std::map<ModelKind, std::size_t> per_model;
  for (const auto& r : reports) ++per_model[r.model];
  return std::all_of(per_model.begin(), per_model.end(), [](const auto& kv) { return kv.second == kTrials; });
}

int command_train(const Json& cfg, Console& con) {
  const fs::path out = str(cfg, "out");
  ensure_directory(out);
  io::write_json(out / "run_config.json", cfg);
  run_tasks(cfg, make_tasks(cfg), out, 1, con);
  return 0;
}

int command_compare(const Json& cfg, Console& con) {
  const fs::path out = str(cfg, "out");
  ensure_directory(out);
  io::write_json(out / "run_config.json", cfg);
  auto tasks = make_tasks(cfg);
  const auto outcomes = run_tasks(cfg, tasks, out, count(cfg, "jobs"), con);
  std::vector<eval::TrialReport> reports;
  for (const auto& o : outcomes) reports.push_back(o.report);
  std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
    return std::pair(a.model, a.trial) < std::pair(b.model, b.trial);
  });

  // Constant predictor: per-year training means, scored on each test split.
  std::vector<double> baseline;
  std::string baseline_csv = "trial,total_rmse_px\n";
  for (std::size_t trial : selected_trials(cfg)) {
    const PreparedDataset data = corpus::read_prepared(locate_prepared(str(cfg, "data"), trial));
    const auto r = eval::evaluate_constant(eval::train_mean_prediction(data), data);
    baseline.push_back(r.total_px);
    baseline_csv += std::to_string(trial) + "," + eval::format_double(r.total_px) + "\n";
  }

  io::write_text(out / "metrics.csv", eval::metrics_csv(reports));
  if (complete(reports)) {
    const auto agg = eval::aggregate(reports);
    eval::emit_report(agg, reports, out);
    print_summary(agg, con);
    std::vector<const eval::ModelAggregate*> order;
    for (const auto& m : agg.models) order.push_back(&m);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->mean_total < b->mean_total; });
    std::string ranking = "ordering by mean total RMSE:";
    for (std::size_t i = 0; i < order.size(); ++i) {
      ranking += (i == 0 ? " " : " < ") + std::string(models::model_kind_name(order[i]->model));
    }
    con.line(ranking);
  } else {
    con.line("fewer than " + std::to_string(kTrials) + " trials per model; summary.csv not written");
  }
  double mean = 0.0;
  for (double b : baseline) mean += b;
  mean /= static_cast<double>(baseline.size());
  const double sd = baseline.size() > 1 ? eval::sample_stddev(baseline) : 0.0;
  baseline_csv += "mean," + eval::format_double(mean) + "\nstd," + eval::format_double(sd) + "\n";
  io::write_text(out / "baseline.csv", baseline_csv);
  con.line("train-mean predictor " + eval::format_mean_std(mean, sd) + " px");
  return 0;
}

// ---------------------------------------------------------------- evaluate

int command_evaluate(const Json& cfg, Console& con) {
  const fs::path out = str(cfg, "out");
  const fs::path dir = str(cfg, "checkpoints").empty() ? out / "checkpoints" : fs::path(str(cfg, "checkpoints"));
  const bool explicit_choice = !cfg.at("trial").is_string() || str(cfg, "model") != "all";
  std::vector<eval::TrialReport> reports;
  for (std::size_t trial : selected_trials(cfg)) {
    std::optional<PreparedDataset> data;
    for (ModelKind kind : selected_models(cfg)) {
      const auto path = find_checkpoint(dir, kind, trial);
      if (!path) {
        if (explicit_choice) throw ConfigError("no checkpoint for " + run_name(kind, trial) + " in " + dir.string());
        continue;
      }
      const auto ckpt = training::read_checkpoint(*path);
      if (ckpt.trial != trial || ckpt.model.kind != kind) {
        throw DataError(path->string() + " holds " + run_name(ckpt.model.kind, ckpt.trial));
      }
      if (!data) data = corpus::read_prepared(locate_prepared(str(cfg, "data"), trial));
      models::Model model = training::load_model(ckpt);
      reports.push_back(eval::evaluate_test(model, *data));
      con.line(run_name(kind, trial) + ": test rmse " + fixed(reports.back().total_px, 4) + " px");
    }
  }
  if (reports.empty()) throw ConfigError("no checkpoints found in " + dir.string());
  ensure_directory(out);
  io::write_json(out / "run_config.json", cfg);
  std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
    return std::pair(a.model, a.trial) < std::pair(b.model, b.trial);
  });
  io::write_text(out / "metrics.csv", eval::metrics_csv(reports));
  if (complete(reports)) {
    const auto agg = eval::aggregate(reports);
    eval::emit_report(agg, reports, out);
    print_summary(agg, con);
  }
  return 0;
}

// ---------------------------------------------------------------- gradcheck

int command_gradcheck(const Json& cfg, Console& con) {
  const fs::path out = str(cfg, "out");
  if (!out.empty()) {
    ensure_directory(out);
    io::write_json(out / "run_config.json", cfg);
  }
  verify::GradcheckOptions options;
  options.seed = count(cfg, "seed");
  options.tolerance = real(cfg, "tolerance");
  options.include_faulty_fixture = cfg.at("with_faulty_fixture").get<bool>();
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = verify::run_gradcheck_suite(options);
  std::size_t width = 9;
  for (const auto& r : rows) width = std::max(width, r.component.size());
  std::ostringstream table;
  table << std::left << std::setw(static_cast<int>(width) + 2) << "component" << std::setw(14) << "max_rel_err"
        << std::setw(10) << "scalars" << "status  worst parameter\n";
  bool all = true;
  for (const auto& r : rows) {
    std::ostringstream err;
    err << std::scientific << std::setprecision(3) << r.max_relative_error;
    table << std::left << std::setw(static_cast<int>(width) + 2) << r.component << std::setw(14) << err.str()
          << std::setw(10) << r.scalars << (r.passed ? "PASS    " : "FAIL    ") << r.worst_parameter << '\n';
    all = all && r.passed;
  }
  con.out() << table.str();
  con.line(std::to_string(rows.size()) + " components, " + (all ? "all pass" : "FAILURES") + " (tolerance " +
           eval::format_double(options.tolerance) + ", " + fixed(seconds_since(t0), 1) + " s)");
  if (!out.empty()) io::write_text(out / "gradcheck.txt", table.str());
  return all ? 0 : 1;
}

int dispatch(const Invocation& inv, Console& con) {
  const Json cfg = effective_config(inv);
  con.line("effective configuration (" + inv.command + "):");
  con.line(cfg.dump(2));
  if (inv.command == "synth") return command_synth(cfg, inv.force, con);
  if (inv.command == "prepare") return command_prepare(cfg, inv.force, con);
  if (inv.command == "train") return command_train(cfg, con);
  if (inv.command == "evaluate") return command_evaluate(cfg, con);
  if (inv.command == "compare") return command_compare(cfg, con);
  return command_gradcheck(cfg, con);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shallow ice-layer thickness prediction from deep-layer graphs"};
  app.name("icelayer");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "list every command and flag");

  Invocation inv;
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, bool>> switches;
  std::map<std::string, std::string> config_paths;
  std::map<std::string, bool> forces;
  const std::map<std::string, std::string> descriptions = {
      {"synth", "generate a synthetic corpus"},
      {"prepare", "build normalized graph sequences and the five trial splits"},
      {"train", "train one (model, trial) or all of them"},
      {"evaluate", "score checkpoints on their test splits"},
      {"compare", "train and evaluate every model over every trial"},
      {"gradcheck", "finite-difference check of every differentiable component"}};
  std::vector<CLI::App*> subs;
  for (const std::string command : {"synth", "prepare", "train", "evaluate", "compare", "gradcheck"}) {
    CLI::App* sub = app.add_subcommand(command, descriptions.at(command));
    subs.push_back(sub);
    sub->add_option("--config", config_paths[command], "JSON config file");
    if (command != "gradcheck" && command != "train" && command != "evaluate" && command != "compare") {
      sub->add_flag("--force", forces[command], "overwrite a non-empty output directory");
    }
    for (const auto& name : command_keys(command)) {
      const Key& k = key(name);
      if (k.kind == Kind::boolean) {
        sub->add_flag(flag_name(name), switches[command][name], k.help);
      } else {
        const std::string fallback = name == "out" ? default_out(command)
                                     : k.fallback.is_string() ? k.fallback.get<std::string>()
                                                              : k.fallback.dump();
        sub->add_option(flag_name(name), raw[command][name], k.help + " [" + fallback + "]");
      }
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  for (CLI::App* sub : subs) {
    if (!sub->parsed()) continue;
    inv.command = sub->get_name();
    if (sub->count("--config") > 0) inv.config_path = config_paths[inv.command];
    inv.force = forces[inv.command];
    for (const auto& name : command_keys(inv.command)) {
      if (key(name).kind == Kind::boolean) {
        if (switches[inv.command][name]) inv.switches[name] = true;
      } else if (sub->count(flag_name(name)) > 0) {
        inv.flags[name] = raw[inv.command][name];
      }
    }
  }

  Console con(out, err);
  try {
    return dispatch(inv, con);
  } catch (const ConfigError& e) {
    con.error(std::string("usage error: ") + e.what());
    return 2;
  } catch (const ContractError& e) {
    con.error(std::string("contract error: ") + e.what());
    return 2;
  } catch (const DimensionError& e) {
    con.error(std::string("contract error: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    con.error(std::string("error: ") + e.what());
    return 1;
  }
}

}  // namespace icelayer::cli
