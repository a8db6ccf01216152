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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "icelayer/cli.hpp"
#include "icelayer/corpus_io.hpp"
#include "icelayer/dataset.hpp"
#include "icelayer/gradcheck_suite.hpp"
#include "icelayer/io.hpp"
#include "icelayer/models.hpp"
#include "icelayer/prepared.hpp"
#include "icelayer/rng.hpp"
#include "icelayer/training.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;
using namespace icelayer;
using namespace icelayer::testing::oracle;
using icelayer::testing::TempDir;

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Collects failed checks for one criterion.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream s;
      s.precision(17);
      s << what << ": got " << got << ", want " << want << " (tol " << tol << ")";
      failures_.push_back(s.str());
    }
  }
  void note(std::string text) { notes_.push_back(std::move(text)); }
  bool ok() const { return failures_.empty(); }
  const std::vector<std::string>& failures() const { return failures_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

void require_cli(Checks& c, const std::vector<std::string>& args, CliResult* result = nullptr) {
  CliResult r = cli(args);
  std::string joined;
  for (const auto& a : args) joined += " " + a;
  c.expect(r.code == 0, "icelayer" + joined + " exited " + std::to_string(r.code) + ": " + r.err);
  if (result != nullptr) *result = std::move(r);
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  if (!fs::exists(dir)) return files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = io::read_text(e.path());
  }
  return files;
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(io::read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

// 1. Gradient fidelity.
void gradient_fidelity(Checks& c) {
  const Clock clock;
  const auto rows = verify::run_gradcheck_suite({});
  const double elapsed = clock.seconds();
  double worst = 0.0;
  std::string worst_name;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    seen.insert(r.component);
    c.expect(r.passed && r.max_relative_error < 1e-5,
             r.component + " relative error " + fmt(r.max_relative_error) + " at " + r.worst_parameter);
    if (r.max_relative_error > worst) {
      worst = r.max_relative_error;
      worst_name = r.component;
    }
  }
  for (const char* m : {"model:gat_lstm", "model:gcn", "model:lstm"}) c.expect(seen.count(m) == 1, std::string("missing ") + m);
  c.expect(elapsed < 300.0, "runtime " + fmt(elapsed) + " s");
  c.note(std::to_string(rows.size()) + " components, worst " + fmt(worst) + " (" + worst_name + "), " +
         fmt(elapsed) + " s");
}

std::vector<PreparedDataset> synthetic_trials(std::size_t records, std::size_t columns, std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.records = records;
  cfg.columns = columns;
  cfg.seed = seed;
  std::vector<LabeledRecord> labeled;
  for (const auto& r : generate_synthetic(cfg)) labeled.push_back(label_record(r));
  PrepareOptions options;
  options.seed = seed;
  return prepare_trials(filter_usable(labeled), options);
}

// 2. Protocol exactness.
void protocol_exactness(Checks& c) {
  c.expect(training::lr_at_epoch(0) == 0.01, "lr(0)");
  c.expect(training::lr_at_epoch(125) == 0.005, "lr(125)");
  c.expect(training::lr_at_epoch(250) == 0.0025, "lr(250)");
  c.expect(training::lr_at_epoch(375) == 0.00125, "lr(375)");

  const auto trials = synthetic_trials(10, 4, 5);
  const PreparedDataset& data = trials[0];
  training::TrainConfig tc;
  tc.seed = 5;
  std::size_t epochs_seen = 0;
  const auto result = training::run_trial(models::ModelConfig{}, data, tc,
                                          [&](std::size_t, double, double) { ++epochs_seen; });
  c.expect(epochs_seen == 500, "observed " + std::to_string(epochs_seen) + " epochs");
  c.expect(result.optimizer_steps == 500 * data.split.train.size(),
           "optimizer steps " + std::to_string(result.optimizer_steps));
  for (std::size_t e = 0; e < 500; ++e) {
    const double want = 0.01 / static_cast<double>(1u << (e / 125));
    if (result.learning_rate.size() != 500 || result.learning_rate[e] != want) {
      c.expect(false, "logged lr at epoch " + std::to_string(e));
      break;
    }
  }

  // One Adam step with coupled decay against a hand computation.
  diff::Parameter p("p", Tensor::matrix(2, 2, {0.5, -2.0, 3.0, 0.25}));
  p.grad = Tensor::matrix(2, 2, {0.1, 0.0, -4.0, 2e-4});
  std::vector<diff::Parameter*> ps{&p};
  training::AdamState st = training::make_adam_state(ps);
  training::adam_step(ps, st, 0.01, training::TrainConfig{});
  const double theta[] = {0.5, -2.0, 3.0, 0.25}, g[] = {0.1, 0.0, -4.0, 2e-4};
  for (int i = 0; i < 4; ++i) {
    const double gd = g[i] + 1e-4 * theta[i];
    const double m = 0.1 * gd / (1 - 0.9), v = 0.001 * gd * gd / (1 - 0.999);
    c.near(p.value[i], theta[i] - 0.01 * m / (std::sqrt(v) + 1e-8), 1e-12, "adam step entry " + std::to_string(i));
  }
  c.note(std::to_string(result.optimizer_steps) + " optimizer steps over 500 epochs, |train| = " +
         std::to_string(data.split.train.size()));
}

// 3. Dataset protocol through synth and prepare.
void dataset_protocol(Checks& c) {
  const TempDir dir("acc3");
  const Clock clock;
  require_cli(c, {"synth", "--records", "3147", "--short-records", "1893", "--columns", "16", "--seed", "3", "--out",
                  (dir / "corpus").string()});
  CliResult prep;
  require_cli(c, {"prepare", "--corpus", (dir / "corpus").string(), "--out", (dir / "prep").string(), "--seed", "3"},
              &prep);
  const double elapsed = clock.seconds();
  if (!c.ok()) return;
  const io::Json report = io::read_json(dir / "prep/prepare_report.json");
  c.expect(report["records"] == 3147, "records " + report["records"].dump());
  c.expect(report["usable"] == 1254, "usable " + report["usable"].dump());
  for (std::size_t t = 0; t < kTrials; ++t) {
    const PreparedDataset d = corpus::read_prepared(corpus::find_prepared(dir / "prep", t));
    const auto& s = d.split;
    c.expect(s.train.size() == 752 && s.validation.size() == 251 && s.test.size() == 251,
             "trial " + std::to_string(t) + " split " + std::to_string(s.train.size()) + "/" +
                 std::to_string(s.validation.size()) + "/" + std::to_string(s.test.size()));
    std::set<std::string> all(s.train.begin(), s.train.end());
    all.insert(s.validation.begin(), s.validation.end());
    all.insert(s.test.begin(), s.test.end());
    c.expect(all.size() == 1254, "trial " + std::to_string(t) + " splits overlap");
    std::set<std::string> ids;
    for (const auto& seq : d.sequences) ids.insert(seq.record_id);
    c.expect(ids == all, "trial " + std::to_string(t) + " splits do not cover the usable records");
  }
  c.expect(elapsed < 60.0, "runtime " + fmt(elapsed) + " s");
  c.note("3147 records, 1254 usable, 752/251/251 x 5 trials, " + fmt(elapsed) + " s");
}

// 4. Structural invariants.
void structural_invariants(Checks& c) {
  const TemporalGraphSequence s = verify::toy_sequence(16, 41);
  double worst_row = 0.0;
  for (models::EdgeBias bias : {models::EdgeBias::none, models::EdgeBias::log_weight}) {
    for (std::size_t heads : {1u, 2u}) {
      models::ModelConfig cfg;
      cfg.attention_heads = heads;
      cfg.edge_bias = bias;
      models::Model m(cfg, 4);
      diff::Tape tape;
      models::AttentionTrace trace;
      m.forward(tape, s, {}, &trace);
      c.expect(trace.size() == kFeatureYears * 4 * heads, "attention trace size");
      for (const Tensor& alpha : trace) {
        for (std::size_t i = 0; i < alpha.rows(); ++i) {
          double row = 0.0;
          for (std::size_t j = 0; j < alpha.cols(); ++j) row += alpha(i, j);
          worst_row = std::max(worst_row, std::abs(row - 1.0));
        }
      }
    }
  }
  c.expect(worst_row <= 1e-12, "attention row sum off by " + fmt(worst_row));

  double worst_perm = 0.0;
  for (models::ModelKind kind : {models::ModelKind::gat_lstm, models::ModelKind::gcn}) {
    models::Model m(models::ModelConfig{kind}, 8);
    const Tensor base = m.predict(s);
    Rng rng(100 + static_cast<int>(kind));
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::size_t> perm(16);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      rng.shuffle(std::span(perm));
      const Tensor out = m.predict(permuted(s, perm));
      for (std::size_t i = 0; i < 16; ++i) {
        for (std::size_t y = 0; y < kTargetYears; ++y) {
          worst_perm = std::max(worst_perm, std::abs(out(i, y) - base(perm[i], y)));
        }
      }
    }
  }
  c.expect(worst_perm <= 1e-9, "permutation deviation " + fmt(worst_perm));

  // Normalization over a whole prepared collection.
  const auto trials = synthetic_trials(30, 16, 6);
  const PreparedDataset& d = trials[0];
  double worst_moment = 0.0;
  for (std::size_t dim = 0; dim < kNodeFeatures; ++dim) {
    double sum = 0.0, n = 0.0;
    for (const auto& seq : d.sequences) {
      for (const auto& g : seq.graphs) {
        for (std::size_t i = 0; i < g.features.rows(); ++i) {
          sum += g.features(i, dim);
          n += 1.0;
        }
      }
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& seq : d.sequences) {
      for (const auto& g : seq.graphs) {
        for (std::size_t i = 0; i < g.features.rows(); ++i) sq += (g.features(i, dim) - mean) * (g.features(i, dim) - mean);
      }
    }
    const double sigma = std::sqrt(sq / n);
    worst_moment = std::max({worst_moment, std::abs(mean), std::abs(sigma - 1.0)});
  }
  c.expect(worst_moment <= 1e-9, "feature moments off by " + fmt(worst_moment));
  double lo = 1e300, hi = -1e300;
  for (const auto& seq : d.sequences) {
    const Tensor& w = seq.adjacency.weights;
    for (std::size_t i = 0; i < w.rows(); ++i) {
      for (std::size_t j = 0; j < w.cols(); ++j) {
        if (i == j) continue;
        lo = std::min(lo, w(i, j));
        hi = std::max(hi, w(i, j));
      }
    }
  }
  c.expect(lo == 0.0 && hi == 1.0, "adjacency range [" + fmt(lo, 17) + ", " + fmt(hi, 17) + "]");
  c.note("row sums within " + fmt(worst_row) + ", permutations within " + fmt(worst_perm) + ", moments within " +
         fmt(worst_moment) + ", adjacency [" + fmt(lo) + ", " + fmt(hi) + "]");
}

// 5. Oracle equivalence.
void oracle_equivalence(Checks& c) {
  double worst_lstm = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const TemporalGraphSequence s = verify::toy_sequence(1, 50 + seed);
    models::Model m(models::ModelConfig{}, seed);
    const auto want = head(lstm(s, 0, single_node_gat_lstm_gates(m), m.config().hidden), m.parameters());
    const Tensor got = m.predict(s);
    for (std::size_t y = 0; y < kTargetYears; ++y) worst_lstm = std::max(worst_lstm, std::abs(got(0, y) - want[y]));
  }
  c.expect(worst_lstm <= 1e-12, "single-node GAT-LSTM deviation " + fmt(worst_lstm));

  double worst_gcn = 0.0;
  for (std::size_t n : {1u, 7u, 16u}) {
    const TemporalGraphSequence s = verify::toy_sequence(n, 60 + n);
    Rng rng(n);
    diff::Parameter w("w", Tensor({models::kConsolidatedFeatures, 6}));
    for (double& v : w.value.data()) v = rng.uniform(-1, 1);
    const Tensor x = models::consolidated_features(s);
    const Matrix want = gcn_dense(s.adjacency.weights, x, w.value);
    diff::Tape tape;
    const Tensor got = models::gcn_layer(tape.constant(x), s.adjacency, models::GCNLayerParams{&w}).value();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < 6; ++j) worst_gcn = std::max(worst_gcn, std::abs(got(i, j) - want[i][j]));
    }
  }
  c.expect(worst_gcn <= 1e-12, "GCN deviation " + fmt(worst_gcn));

  // Render, write PNG, read back, extract.
  const TempDir dir("acc5");
  SyntheticConfig cfg;
  cfg.records = 50;
  cfg.columns = 32;
  cfg.seed = 8;
  std::vector<EchogramRecord> records;
  std::vector<ThicknessTable> truth;
  for (std::size_t i = 0; i < cfg.records; ++i) {
    SyntheticRecord r = synthesize_record(cfg, i);
    truth.push_back(r.truth);
    records.push_back(std::move(r.record));
  }
  corpus::write_corpus(dir.path(), records, cfg.columns);
  const corpus::Manifest manifest = corpus::read_manifest(dir / "manifest.json");
  std::size_t exact = 0;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const EchogramRecord loaded = corpus::load_record(manifest, manifest.records[i]);
    const bool same = loaded.mask == records[i].mask && extract_thicknesses(loaded) == truth[i] &&
                      extract_thicknesses(records[i]) == truth[i];
    exact += same ? 1 : 0;
  }
  c.expect(manifest.records.size() == 50 && exact == 50, std::to_string(exact) + " of 50 records round-trip exactly");
  c.note("single-node " + fmt(worst_lstm) + ", GCN " + fmt(worst_gcn) + ", " + std::to_string(exact) +
         "/50 records exact");
}

// 6. Convergence smoke.
void convergence_smoke(Checks& c) {
  const Clock clock;
  SyntheticConfig cfg;
  cfg.records = 12;
  cfg.columns = 16;
  cfg.seed = 12;
  std::vector<LabeledRecord> labeled;
  for (const auto& r : generate_synthetic(cfg)) labeled.push_back(label_record(r));
  PrepareOptions options;
  options.seed = 12;
  const auto trials = prepare_trials(filter_usable(labeled), options);
  const PreparedDataset& d = trials[0];
  c.expect(d.split.train.size() == 8 && d.node_count() == 16, "overfit set is not 8 x 16");
  training::TrainConfig tc;
  tc.seed = 12;
  tc.checkpoint_policy = training::CheckpointPolicy::final;
  const auto r = training::run_trial(models::ModelConfig{}, d, tc);
  const double first = r.train_loss.front(), last = r.train_loss.back();
  std::size_t reached = 0;
  for (std::size_t e = 0; e < r.train_loss.size() && reached == 0; ++e) {
    if (r.train_loss[e] <= 0.1 * first) reached = e + 1;
  }
  const double elapsed = clock.seconds();
  c.expect(last <= 0.1 * first, "final loss " + fmt(last) + " vs epoch-1 loss " + fmt(first));
  c.expect(elapsed < 600.0, "runtime " + fmt(elapsed) + " s");
  c.note("epoch-1 loss " + fmt(first) + ", final " + fmt(last) + " (" + fmt(100.0 * last / first) +
         "%), 10% first reached at epoch " + std::to_string(reached) + ", " + fmt(elapsed) + " s");
}

// Synthetic corpus used for the comparative check.
const std::vector<std::string> kComparisonCorpus{
    "--records", "200", "--columns", "16", "--seed", "11", "--noise-px", "2.5",
    "--along-track-px", "0.3", "--shock-px", "0.5", "--persistence", "0.9"};

double mean_row(const std::vector<std::vector<std::string>>& rows, const std::string& key, std::size_t col) {
  for (const auto& r : rows) {
    if (!r.empty() && r[0] == key && r.size() > col) return std::stod(r[col]);
  }
  throw std::runtime_error("no row '" + key + "'");
}

// 7. End-to-end comparative sanity.
void comparative_sanity(Checks& c) {
  const TempDir dir("acc7");
  const Clock clock;
  std::vector<std::string> synth{"synth", "--out", (dir / "corpus").string()};
  synth.insert(synth.end(), kComparisonCorpus.begin(), kComparisonCorpus.end());
  require_cli(c, synth);
  require_cli(c, {"prepare", "--corpus", (dir / "corpus").string(), "--out", (dir / "prep").string(), "--seed", "11"});
  CliResult cmp;
  require_cli(c, {"compare", "--data", (dir / "prep").string(), "--out", (dir / "runs").string(), "--seed", "11"},
              &cmp);
  const double elapsed = clock.seconds();
  if (!c.ok()) return;
  const auto summary = read_csv(dir / "runs/summary.csv");
  const auto baseline = read_csv(dir / "runs/baseline.csv");
  c.expect(summary.size() == 4, "summary rows");
  const double base = mean_row(baseline, "mean", 1);
  std::map<std::string, double> mean;
  for (const char* m : {"gat_lstm", "gcn", "lstm"}) {
    mean[m] = mean_row(summary, m, 2);
    c.expect(mean_row(summary, m, 6) == 5.0, std::string(m) + " trial count");
    c.expect(mean[m] < base, std::string(m) + " mean " + fmt(mean[m], 5) + " does not beat train-mean " + fmt(base, 5));
  }
  c.expect(mean["gat_lstm"] <= mean["lstm"],
           "GAT-LSTM " + fmt(mean["gat_lstm"], 5) + " above LSTM " + fmt(mean["lstm"], 5));
  c.expect(elapsed < 3600.0, "runtime " + fmt(elapsed) + " s");
  std::string ordering;
  std::istringstream lines(cmp.out);
  for (std::string line; std::getline(lines, line);) {
    if (line.find("ordering") != std::string::npos) ordering = line;
  }
  c.note("gat_lstm " + fmt(mean["gat_lstm"], 4) + ", gcn " + fmt(mean["gcn"], 4) + ", lstm " + fmt(mean["lstm"], 4) +
         ", train-mean " + fmt(base, 4) + " px; " + ordering + "; " + fmt(elapsed / 60.0) + " min");
}

// 8. Determinism: every command twice into the same paths.
void determinism(Checks& c) {
  const TempDir dir("acc8");
  const std::string corpus = (dir / "corpus").string(), prep = (dir / "prep").string();
  const std::string train = (dir / "train").string(), eval = (dir / "eval").string(), cmp = (dir / "cmp").string();
  const std::string grad = (dir / "grad").string();
  const std::vector<std::vector<std::string>> commands{
      {"synth", "--records", "24", "--short-records", "3", "--columns", "6", "--seed", "21", "--out", corpus},
      {"prepare", "--corpus", corpus, "--out", prep, "--seed", "21", "--format", "binary"},
      {"train", "--data", prep, "--out", train, "--model", "all", "--trial", "1", "--epochs", "3", "--seed", "21"},
      {"evaluate", "--data", prep, "--checkpoints", train + "/checkpoints", "--out", eval},
      {"compare", "--data", prep, "--out", cmp, "--epochs", "2", "--hidden", "8", "--seed", "21", "--jobs", "2"},
  };
  std::map<std::string, std::string> first;
  std::vector<std::string> stdout_first;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto* d : {&corpus, &prep, &train, &eval, &cmp, &grad}) fs::remove_all(*d);
    std::vector<std::string> outs;
    for (const auto& args : commands) {
      CliResult r;
      require_cli(c, args, &r);
      // Timed lines are dropped; parallel runs may interleave the rest.
      std::vector<std::string> kept;
      std::istringstream lines(r.out);
      for (std::string line; std::getline(lines, line);) {
        if (line.find(" s)") == std::string::npos) kept.push_back(line);
      }
      std::sort(kept.begin(), kept.end());
      outs.push_back(std::accumulate(kept.begin(), kept.end(), std::string{},
                                     [](std::string a, const std::string& b) { return a + b + "\n"; }));
    }
    std::map<std::string, std::string> files;
    for (const auto* d : {&corpus, &prep, &train, &eval, &cmp}) {
      for (auto& [name, text] : snapshot(*d)) files[fs::path(*d).filename().string() + "/" + name] = std::move(text);
    }
    if (pass == 0) {
      first = std::move(files);
      stdout_first = std::move(outs);
      continue;
    }
    c.expect(files.size() == first.size(), "file count " + std::to_string(files.size()) + " vs " +
                                               std::to_string(first.size()));
    for (const auto& [name, text] : first) {
      const auto it = files.find(name);
      c.expect(it != files.end() && it->second == text, name + " differs on rerun");
    }
    for (std::size_t i = 0; i < outs.size(); ++i) c.expect(outs[i] == stdout_first[i], commands[i][0] + " stdout differs");
  }
  c.expect(first.count("cmp/metrics.csv") == 1 && first.count("eval/metrics.csv") == 1, "metrics files missing");
  c.note(std::to_string(first.size()) + " output files byte-identical across reruns of synth, prepare, train, "
         "evaluate and compare");
}

struct Criterion {
  int number;
  const char* name;
  std::function<void(Checks&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "gradient fidelity", gradient_fidelity},       {2, "protocol exactness", protocol_exactness},
      {3, "dataset protocol", dataset_protocol},          {4, "structural invariants", structural_invariants},
      {5, "oracle equivalence", oracle_equivalence},      {6, "convergence smoke", convergence_smoke},
      {7, "comparative sanity", comparative_sanity},      {8, "determinism", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& crit : criteria) {
    if (!wanted.empty() && wanted.count(crit.number) == 0) continue;
    Checks checks;
    const Clock clock;
    try {
      crit.run(checks);
    } catch (const std::exception& e) {
      checks.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = checks.ok();
    failed += ok ? 0 : 1;
    std::cout << (ok ? "PASS" : "FAIL") << " [" << crit.number << "] " << crit.name << " (" << fmt(clock.seconds())
              << " s)";
    for (const auto& n : checks.notes()) std::cout << ": " << n;
    std::cout << "\n";
    for (const auto& f : checks.failures()) std::cout << "    " << f << "\n";
    std::cout.flush();
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
