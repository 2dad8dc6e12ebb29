#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fcoh/errors.hpp"
#include "fcoh/runner.hpp"

namespace {

void add_run_config_flags(CLI::App* cmd, fcoh::RunConfig& config,
                          std::string& config_file) {
  cmd->add_option("--config", config_file, "key=value config file");
  cmd->add_option("--dataset", config.dataset, "feature file (.fvec or .csv)");
  cmd->add_option("--format", config.format, "auto|fvec|csv");
  cmd->add_option("--learner", config.learner, "fcoh|lsh");
  cmd->add_option("--r", config.r, "code length in bits");
  cmd->add_option("--lambda1", config.hp.lambda1, "similar-pair weight");
  cmd->add_option("--lambda2", config.hp.lambda2, "dissimilar-pair weight");
  cmd->add_option("--mu", config.hp.mu, "learning rate");
  cmd->add_option("--n-t", config.n_t, "stream batch size");
  cmd->add_option("--train-size", config.train_size, "training samples");
  cmd->add_option("--seed", config.seed, "master seed");
  cmd->add_option("--query-per-class", config.query_per_class,
                  "queries sampled per class");
  cmd->add_option("--query-total", config.query_total,
                  "total queries sampled");
  cmd->add_option("--eval-every", config.eval_every,
                  "evaluate every E batches");
  cmd->add_option("--ks", config.ks, "precision@K cutoffs");
  cmd->add_option("--map-cutoff", config.map_cutoff,
                  "mAP ranking cutoff (0 = full)");
  cmd->add_flag("--center-features", config.center_features,
                "zero-center features using the first batch mean");
  cmd->add_flag("--codes-from-batch-start", config.codes_from_batch_start,
                "freeze constant codes at batch start instead of per class");
  cmd->add_option("--out-dir", config.out_dir, "run artifact directory");
}

// Flags override file values: re-parse the file first, then let CLI11 apply
// whatever was set on the command line.
fcoh::RunConfig resolve_config(const CLI::App* cmd,
                               const fcoh::RunConfig& parsed,
                               const std::string& config_file) {
  if (config_file.empty()) return parsed;
  fcoh::RunConfig merged = fcoh::RunConfig::from_file(config_file);
  auto overridden = [&](const std::string& flag) {
    return cmd->count(flag) > 0;
  };
  if (overridden("--dataset")) merged.dataset = parsed.dataset;
  if (overridden("--format")) merged.format = parsed.format;
  if (overridden("--learner")) merged.learner = parsed.learner;
  if (overridden("--r")) merged.r = parsed.r;
  if (overridden("--lambda1")) merged.hp.lambda1 = parsed.hp.lambda1;
  if (overridden("--lambda2")) merged.hp.lambda2 = parsed.hp.lambda2;
  if (overridden("--mu")) merged.hp.mu = parsed.hp.mu;
  if (overridden("--n-t")) merged.n_t = parsed.n_t;
  if (overridden("--train-size")) merged.train_size = parsed.train_size;
  if (overridden("--seed")) merged.seed = parsed.seed;
  if (overridden("--query-per-class")) {
    merged.query_per_class = parsed.query_per_class;
  }
  if (overridden("--query-total")) merged.query_total = parsed.query_total;
  if (overridden("--eval-every")) merged.eval_every = parsed.eval_every;
  if (overridden("--ks")) merged.ks = parsed.ks;
  if (overridden("--map-cutoff")) merged.map_cutoff = parsed.map_cutoff;
  if (overridden("--center-features")) {
    merged.center_features = parsed.center_features;
  }
  if (overridden("--codes-from-batch-start")) {
    merged.codes_from_batch_start = parsed.codes_from_batch_start;
  }
  if (overridden("--out-dir")) merged.out_dir = parsed.out_dir;
  return merged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fcoh: streaming supervised hashing trainer and benchmark"};
  app.require_subcommand(1);

  fcoh::RunConfig train_config;
  std::string train_config_file;
  CLI::App* train = app.add_subcommand("train", "train over a stream and "
                                                "evaluate per stage");
  add_run_config_flags(train, train_config, train_config_file);

  fcoh::RunConfig eval_config;
  std::string eval_config_file;
  std::string checkpoint_path;
  CLI::App* eval = app.add_subcommand("eval", "one-shot checkpoint "
                                              "evaluation");
  eval->add_option("--checkpoint", checkpoint_path, "model checkpoint")
      ->required();
  add_run_config_flags(eval, eval_config, eval_config_file);

  fcoh::SynthParams synth_params;
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic Gaussian "
                                                "cluster feature file");
  synth->add_option("--out", synth_params.out, "output .fvec path")
      ->required();
  synth->add_option("--dim", synth_params.d, "feature dimension");
  synth->add_option("--classes", synth_params.classes, "number of clusters");
  synth->add_option("--per-class", synth_params.per_class,
                    "samples per cluster");
  synth->add_option("--sep", synth_params.sep, "minimum center separation");
  synth->add_option("--noise", synth_params.noise, "per-dimension stddev");
  synth->add_option("--seed", synth_params.seed, "generator seed");

  std::vector<std::size_t> bench_dims = {64, 256, 1024};
  fcoh::BenchConfig bench_base;
  std::size_t bench_reps = 3;
  std::uint64_t bench_seed = 0;
  CLI::App* bench = app.add_subcommand("bench", "time hash-function and "
                                                "hash-table updates");
  bench->add_option("--dims", bench_dims, "feature dimensions to sweep");
  bench->add_option("--n-t", bench_base.n_t, "stream batch size");
  bench->add_option("--r", bench_base.r, "code length in bits");
  bench->add_option("--batches", bench_base.batches, "batches per run");
  bench->add_option("--classes", bench_base.classes, "synthetic classes");
  bench->add_option("--db-size", bench_base.db_size,
                    "retrieval set size for table rebuilds");
  bench->add_option("--reps", bench_reps, "repetitions (median reported)");
  bench->add_option("--seed", bench_seed, "generator seed");

  try {
    app.parse(argc, argv);

    if (train->parsed()) {
      const fcoh::RunConfig config =
          resolve_config(train, train_config, train_config_file);
      const std::vector<fcoh::EvalReport> reports = fcoh::cmd_train(config);
      std::cout << "wrote " << reports.size() << " stage reports to "
                << config.out_dir << "\n";
    } else if (eval->parsed()) {
      const fcoh::RunConfig config =
          resolve_config(eval, eval_config, eval_config_file);
      const fcoh::EvalReport report = fcoh::cmd_eval(checkpoint_path, config);
      std::cout << report.to_json_line() << "\n";
    } else if (synth->parsed()) {
      fcoh::cmd_synth(synth_params);
      std::cout << "wrote " << synth_params.out << "\n";
    } else if (bench->parsed()) {
      std::vector<fcoh::BenchConfig> configs;
      for (std::size_t d : bench_dims) {
        fcoh::BenchConfig bc = bench_base;
        bc.d = d;
        configs.push_back(bc);
      }
      fcoh::cmd_bench(configs, bench_reps, bench_seed, &std::cout);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const fcoh::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const fcoh::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const fcoh::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
