#include "fcoh/runner.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fcoh/baseline.hpp"
#include "fcoh/checkpoint.hpp"
#include "fcoh/errors.hpp"
#include "fcoh/index.hpp"
#include "fcoh/rng.hpp"

namespace fcoh {

namespace {

using steady = std::chrono::steady_clock;

double seconds_since(steady::time_point start) {
  return std::chrono::duration<double>(steady::now() - start).count();
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    out.push_back(std::stoull(cell));
  }
  return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw UsageError("config: boolean key '" + key + "' got '" + value + "'");
}

Dataset load_by_format(const RunConfig& config) {
  if (config.format == "auto") return load_features(config.dataset);
  if (config.format == "fvec") {
    return load_features(config.dataset, FeatureFormat::fvec);
  }
  if (config.format == "csv") {
    return load_features(config.dataset, FeatureFormat::csv);
  }
  throw UsageError("config: unknown format '" + config.format + "'");
}

struct EvalContext {
  Matrix retrieval_features;
  Matrix query_features;
  GroundTruth gt;
  std::vector<std::int64_t> db_ids;
};

EvalReport evaluate_model(const Matrix& weights, const EvalContext& ctx,
                          const RunConfig& config, double* table_seconds) {
  const steady::time_point start = steady::now();
  const HashModel snapshot{Matrix(weights)};
  const BinaryCodeTable table =
      rebuild(snapshot, ctx.retrieval_features, ctx.db_ids);
  if (table_seconds) *table_seconds = seconds_since(start);

  const Matrix query_codes = encode_with(weights, ctx.query_features);
  EvalReport report;
  report.map = mean_ap(query_codes, table, ctx.gt);
  if (config.map_cutoff > 0) {
    report.map_at = {config.map_cutoff,
                     mean_ap(query_codes, table, ctx.gt, config.map_cutoff)};
  }
  report.precision_at_h2 = precision_at_h2(query_codes, table, ctx.gt);
  report.precision_at_k = precision_at_k(query_codes, table, ctx.gt,
                                         config.ks);
  return report;
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config: cannot open " + path.string());
  RunConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << "config: " << path.string() << ":" << lineno
         << ": expected key=value";
      throw UsageError(os.str());
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "dataset") config.dataset = value;
      else if (key == "format") config.format = value;
      else if (key == "learner") config.learner = value;
      else if (key == "r") config.r = std::stoull(value);
      else if (key == "lambda1") config.hp.lambda1 = std::stod(value);
      else if (key == "lambda2") config.hp.lambda2 = std::stod(value);
      else if (key == "mu") config.hp.mu = std::stod(value);
      else if (key == "n_t") config.n_t = std::stoull(value);
      else if (key == "train_size") config.train_size = std::stoull(value);
      else if (key == "seed") config.seed = std::stoull(value);
      else if (key == "query_per_class")
        config.query_per_class = std::stoull(value);
      else if (key == "query_total") config.query_total = std::stoull(value);
      else if (key == "eval_every") config.eval_every = std::stoull(value);
      else if (key == "ks") config.ks = parse_size_list(value);
      else if (key == "map_cutoff") config.map_cutoff = std::stoull(value);
      else if (key == "center_features")
        config.center_features = parse_bool(value, key);
      else if (key == "codes_from_batch_start")
        config.codes_from_batch_start = parse_bool(value, key);
      else if (key == "out_dir") config.out_dir = value;
      else throw UsageError("config: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      std::ostringstream os;
      os << "config: " << path.string() << ":" << lineno << ": bad value '"
         << value << "' for key '" << key << "'";
      throw UsageError(os.str());
    }
  }
  return config;
}

void RunConfig::echo(std::ostream& out) const {
  out << "dataset=" << dataset << "\n";
  out << "format=" << format << "\n";
  out << "learner=" << learner << "\n";
  out << "r=" << r << "\n";
  out << "lambda1=" << hp.lambda1 << "\n";
  out << "lambda2=" << hp.lambda2 << "\n";
  out << "mu=" << hp.mu << "\n";
  out << "n_t=" << n_t << "\n";
  out << "train_size=" << train_size << "\n";
  out << "seed=" << seed << "\n";
  out << "query_per_class=" << query_per_class << "\n";
  out << "query_total=" << query_total << "\n";
  out << "eval_every=" << eval_every << "\n";
  out << "ks=";
  for (std::size_t i = 0; i < ks.size(); ++i) {
    out << (i ? "," : "") << ks[i];
  }
  out << "\n";
  out << "map_cutoff=" << map_cutoff << "\n";
  out << "center_features=" << (center_features ? 1 : 0) << "\n";
  out << "codes_from_batch_start=" << (codes_from_batch_start ? 1 : 0) << "\n";
  out << "out_dir=" << out_dir << "\n";
}

void RunConfig::validate() const {
  if (dataset.empty()) throw UsageError("config: dataset path required");
  if (!std::filesystem::exists(dataset)) {
    throw DataError("config: dataset file not found: " + dataset);
  }
  if (learner != "fcoh" && learner != "lsh") {
    throw UsageError("config: learner must be fcoh or lsh");
  }
  if (r == 0) throw UsageError("config: r must be >= 1");
  hp.validate();
  if (n_t == 0) throw UsageError("config: n_t must be >= 1");
  if (train_size == 0) throw UsageError("config: train_size must be >= 1");
  if ((query_per_class == 0) == (query_total == 0)) {
    throw UsageError(
        "config: set exactly one of query_per_class / query_total");
  }
  if (eval_every == 0) throw UsageError("config: eval_every must be >= 1");
  if (ks.empty()) throw UsageError("config: ks must be nonempty");
  if (out_dir.empty()) throw UsageError("config: out_dir required");
}

std::vector<EvalReport> cmd_train(const RunConfig& config) {
  config.validate();

  const std::filesystem::path out_dir(config.out_dir);
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream cfg(out_dir / "config.txt");
    if (!cfg) throw DataError("cannot write " + (out_dir / "config.txt").string());
    config.echo(cfg);
  }

  Dataset ds = load_by_format(config);

  // Derive one sub-seed per randomized phase from the master seed.
  Rng seeder(config.seed);
  const std::uint64_t split_seed = seeder.next_u64();
  const std::uint64_t init_seed = seeder.next_u64();
  const std::uint64_t stream_seed = seeder.next_u64();

  SplitSpec split_spec;
  if (config.query_per_class > 0) {
    split_spec.query_per_class = config.query_per_class;
  } else {
    split_spec.query_total = config.query_total;
  }
  split_spec.train_size = config.train_size;
  Splits splits = make_splits(ds, split_seed, split_spec);

  StreamSpec stream_spec;
  stream_spec.batch_size = config.n_t;
  stream_spec.total = config.train_size;
  stream_spec.seed = stream_seed;
  BatchStream batches = stream(splits.train, stream_spec);
  const std::size_t total_stages = batches.batches();

  EvalContext ctx;
  ctx.retrieval_features = splits.retrieval.features;
  ctx.query_features = splits.queries.features;
  ctx.gt.query_labels = splits.queries.labels;
  ctx.gt.db_labels = splits.retrieval.labels;
  ctx.db_ids.resize(splits.retrieval.size());
  std::iota(ctx.db_ids.begin(), ctx.db_ids.end(), 0);

  const bool train_weights = config.learner == "fcoh";
  HashModel model = init_model(ds.dim(), config.r, init_seed);
  ClassRunningStats stats;
  TrainOptions opts;
  opts.codes_from_batch_start = config.codes_from_batch_start;

  std::ofstream reports_out(out_dir / "reports.jsonl");
  if (!reports_out) {
    throw DataError("cannot write " + (out_dir / "reports.jsonl").string());
  }

  std::vector<EvalReport> reports;
  Matrix feature_mean;  // first-batch mean when centering is on
  double fn_seconds_total = 0.0;
  double table_seconds_total = 0.0;
  std::size_t samples_seen = 0;
  std::size_t stage = 0;

  while (auto batch = batches.next()) {
    ++stage;
    if (config.center_features) {
      if (feature_mean.empty()) {
        feature_mean = column_mean(batch->x);
        center_columns(ctx.retrieval_features, feature_mean);
        center_columns(ctx.query_features, feature_mean);
      }
      center_columns(batch->x, feature_mean);
    }
    samples_seen += batch->size();

    if (train_weights) {
      const steady::time_point start = steady::now();
      try {
        train_batch(model, stats, *batch, config.hp, opts);
      } catch (const NumericError& e) {
        std::ostringstream os;
        os << "training diverged at stage " << stage << ": " << e.what();
        throw NumericError(os.str());
      }
      fn_seconds_total += seconds_since(start);
      if (!model.weights().all_finite()) {
        std::ostringstream os;
        os << "training diverged at stage " << stage
           << ": non-finite weights (reduce mu?)";
        throw NumericError(os.str());
      }
    }

    if (stage % config.eval_every == 0 || stage == total_stages) {
      double table_seconds = 0.0;
      EvalReport report = evaluate_model(model.weights(), ctx, config,
                                         &table_seconds);
      table_seconds_total += table_seconds;
      report.stage = stage;
      report.samples_seen = samples_seen;
      report.hash_fn_seconds = fn_seconds_total;
      report.hash_table_seconds = table_seconds_total;
      reports_out << report.to_json_line() << "\n";
      reports.push_back(std::move(report));
    }
  }
  reports_out.flush();

  save_checkpoint(out_dir / "model.fcoh", model, stats);

  // Curve summary: mAP vs samples seen, and the final precision@K curve.
  nlohmann::ordered_json summary;
  nlohmann::ordered_json map_curve = nlohmann::ordered_json::array();
  std::vector<std::pair<double, double>> map_points;
  for (const EvalReport& report : reports) {
    map_curve.push_back({{"samples_seen", report.samples_seen},
                         {"map", report.map}});
    map_points.emplace_back(static_cast<double>(report.samples_seen),
                            report.map);
  }
  summary["map_curve"] = map_curve;
  if (map_points.size() >= 2) summary["auc_map"] = auc(map_points);
  if (!reports.empty() && reports.back().precision_at_k.size() >= 2) {
    std::vector<std::pair<double, double>> pk_points;
    for (const auto& [k, v] : reports.back().precision_at_k) {
      pk_points.emplace_back(static_cast<double>(k), v);
    }
    summary["auc_precision_at_k"] = auc(pk_points);
  }
  std::ofstream auc_out(out_dir / "auc.json");
  if (!auc_out) throw DataError("cannot write " + (out_dir / "auc.json").string());
  auc_out << summary.dump(2) << "\n";

  return reports;
}

EvalReport cmd_eval(const std::filesystem::path& checkpoint,
                    const RunConfig& config) {
  config.validate();
  Checkpoint ckpt = load_checkpoint(checkpoint);

  Dataset ds = load_by_format(config);
  if (ckpt.model.dim() != ds.dim()) {
    std::ostringstream os;
    os << "cmd_eval: checkpoint dimension " << ckpt.model.dim()
       << " does not match dataset dimension " << ds.dim();
    throw UsageError(os.str());
  }

  Rng seeder(config.seed);
  const std::uint64_t split_seed = seeder.next_u64();
  seeder.next_u64();  // init seed unused here
  const std::uint64_t stream_seed = seeder.next_u64();

  SplitSpec split_spec;
  if (config.query_per_class > 0) {
    split_spec.query_per_class = config.query_per_class;
  } else {
    split_spec.query_total = config.query_total;
  }
  split_spec.train_size = config.train_size;
  Splits splits = make_splits(ds, split_seed, split_spec);

  EvalContext ctx;
  ctx.retrieval_features = splits.retrieval.features;
  ctx.query_features = splits.queries.features;
  ctx.gt.query_labels = splits.queries.labels;
  ctx.gt.db_labels = splits.retrieval.labels;
  ctx.db_ids.resize(splits.retrieval.size());
  std::iota(ctx.db_ids.begin(), ctx.db_ids.end(), 0);

  if (config.center_features) {
    // Reproduce the training-time transform: mean of the first stream batch.
    StreamSpec stream_spec;
    stream_spec.batch_size = config.n_t;
    stream_spec.total = config.train_size;
    stream_spec.seed = stream_seed;
    BatchStream batches = stream(splits.train, stream_spec);
    auto first = batches.next();
    const Matrix feature_mean = column_mean(first->x);
    center_columns(ctx.retrieval_features, feature_mean);
    center_columns(ctx.query_features, feature_mean);
  }

  double table_seconds = 0.0;
  EvalReport report = evaluate_model(ckpt.model.weights(), ctx, config,
                                     &table_seconds);
  report.stage = 0;
  report.samples_seen = 0;
  report.hash_table_seconds = table_seconds;
  return report;
}

void cmd_synth(const SynthParams& params) {
  if (params.out.empty()) throw UsageError("synth: output path required");
  const Dataset ds = synth_clusters(params.d, params.classes, params.per_class,
                                    params.sep, params.noise, params.seed);
  save_fvec(params.out, ds);
}

std::vector<BenchRow> cmd_bench(const std::vector<BenchConfig>& configs,
                                std::size_t reps, std::uint64_t seed,
                                std::ostream* table_out) {
  if (configs.empty()) throw UsageError("bench: no configurations");
  if (reps < 3) throw UsageError("bench: need at least 3 repetitions");

  std::vector<BenchRow> rows;
  rows.reserve(configs.size());
  for (const BenchConfig& bc : configs) {
    std::vector<double> fn_times, table_times;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const std::uint64_t rep_seed = seed + rep;
      const std::size_t train_total = bc.batches * bc.n_t;
      const std::size_t per_class =
          (train_total + bc.classes - 1) / bc.classes;
      const Dataset train =
          synth_clusters(bc.d, bc.classes, per_class, 6.0, 1.0, rep_seed);
      const Dataset db = synth_clusters(
          bc.d, bc.classes, (bc.db_size + bc.classes - 1) / bc.classes, 6.0,
          1.0, rep_seed + 1000);

      StreamSpec spec;
      spec.batch_size = bc.n_t;
      spec.total = train_total;
      spec.seed = rep_seed;
      BatchStream batches = stream(train, spec);

      HashModel model = init_model(bc.d, bc.r, rep_seed);
      ClassRunningStats stats;
      Hyperparams hp;

      double fn_seconds = 0.0;
      while (auto batch = batches.next()) {
        const steady::time_point start = steady::now();
        train_batch(model, stats, *batch, hp);
        fn_seconds += seconds_since(start);
      }

      std::vector<std::int64_t> ids(db.size());
      std::iota(ids.begin(), ids.end(), 0);
      const steady::time_point start = steady::now();
      const BinaryCodeTable table = rebuild(model, db.features, ids);
      const double table_seconds = seconds_since(start);
      (void)table;

      fn_times.push_back(fn_seconds);
      table_times.push_back(table_seconds);
    }

    auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      return v[v.size() / 2];
    };
    BenchRow row;
    row.config = bc;
    row.hash_fn_seconds = median(fn_times);
    row.hash_table_seconds = median(table_times);
    row.total_seconds = row.hash_fn_seconds + row.hash_table_seconds;
    rows.push_back(row);
  }

  if (table_out) {
    *table_out << std::left << std::setw(8) << "d" << std::setw(8) << "n_t"
               << std::setw(6) << "r" << std::setw(10) << "batches"
               << std::setw(14) << "hash_fn_s" << std::setw(14)
               << "hash_table_s" << std::setw(12) << "total_s" << "\n";
    for (const BenchRow& row : rows) {
      *table_out << std::left << std::setw(8) << row.config.d << std::setw(8)
                 << row.config.n_t << std::setw(6) << row.config.r
                 << std::setw(10) << row.config.batches << std::setw(14)
                 << std::fixed << std::setprecision(6) << row.hash_fn_seconds
                 << std::setw(14) << row.hash_table_seconds << std::setw(12)
                 << row.total_seconds << "\n";
      table_out->unsetf(std::ios::fixed);
    }
  }
  return rows;
}

}  // namespace fcoh
