#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fcoh/data.hpp"
#include "fcoh/eval.hpp"
#include "fcoh/model.hpp"

namespace fcoh {

// Full description of one training run. Parsed from key=value config files
// and/or CLI flags; echoed verbatim into the run directory.
struct RunConfig {
  std::string dataset;          // feature file path
  std::string format = "auto";  // auto | fvec | csv
  std::string learner = "fcoh";  // fcoh | lsh
  std::size_t r = 32;
  Hyperparams hp;                 // lambda1, lambda2, mu
  std::size_t n_t = 100;          // stream batch size
  std::size_t train_size = 0;
  std::uint64_t seed = 0;
  std::size_t query_per_class = 0;  // exactly one of these two is nonzero
  std::size_t query_total = 0;
  std::size_t eval_every = 20;  // checkpoints every E batches
  std::vector<std::size_t> ks = {1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90,
                                 100};
  std::size_t map_cutoff = 0;  // 0 = full-ranking mAP
  bool center_features = false;
  bool codes_from_batch_start = false;
  std::string out_dir;

  static RunConfig from_file(const std::filesystem::path& path);
  void echo(std::ostream& out) const;  // same key=value syntax, fixed order
  void validate() const;
};

// Artifacts written under out_dir: config.txt, reports.jsonl, model.fcoh,
// auc.json. Returns the per-checkpoint reports.
std::vector<EvalReport> cmd_train(const RunConfig& config);

// One-shot evaluation of a checkpoint against the config's dataset/splits.
EvalReport cmd_eval(const std::filesystem::path& checkpoint,
                    const RunConfig& config);

struct SynthParams {
  std::size_t d = 64;
  std::size_t classes = 10;
  std::size_t per_class = 100;
  double sep = 6.0;
  double noise = 1.0;
  std::uint64_t seed = 0;
  std::string out;  // .fvec path
};

void cmd_synth(const SynthParams& params);

struct BenchConfig {
  std::size_t d = 64;
  std::size_t n_t = 100;
  std::size_t r = 32;
  std::size_t batches = 10;
  std::size_t classes = 10;
  std::size_t db_size = 2000;
};

struct BenchRow {
  BenchConfig config;
  double hash_fn_seconds = 0.0;
  double hash_table_seconds = 0.0;
  double total_seconds = 0.0;  // fn + table
};

// Trains `batches` synthetic stages per config and rebuilds a db_size table
// once per repetition; reports the per-config medians over `reps` runs.
std::vector<BenchRow> cmd_bench(const std::vector<BenchConfig>& configs,
                                std::size_t reps, std::uint64_t seed,
                                std::ostream* table_out);

}  // namespace fcoh
