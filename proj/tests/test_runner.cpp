#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fcoh/checkpoint.hpp"
#include "fcoh/data.hpp"
#include "fcoh/errors.hpp"
#include "fcoh/runner.hpp"

using namespace fcoh;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_synth_dataset(const fs::path& dir) {
  const fs::path path = dir / "synth.fvec";
  SynthParams params;
  params.d = 12;
  params.classes = 4;
  params.per_class = 80;  // 320 samples
  params.sep = 8.0;
  params.noise = 0.8;
  params.seed = 5;
  params.out = path.string();
  cmd_synth(params);
  return path;
}

RunConfig tiny_config(const fs::path& dataset, const fs::path& out_dir) {
  RunConfig config;
  config.dataset = dataset.string();
  config.r = 16;
  config.n_t = 40;
  config.train_size = 160;
  config.seed = 11;
  config.query_per_class = 6;
  config.eval_every = 2;
  config.ks = {1, 5, 10};
  config.out_dir = out_dir.string();
  return config;
}

std::string strip_timings(const fs::path& reports_path) {
  std::ifstream in(reports_path);
  REQUIRE(in.good());
  std::ostringstream cleaned;
  std::string line;
  while (std::getline(in, line)) {
    auto j = nlohmann::ordered_json::parse(line);
    j.erase("timings");
    cleaned << j.dump() << "\n";
  }
  return cleaned.str();
}

}  // namespace

TEST_CASE("cmd_train writes the full artifact set") {
  const fs::path dir = fresh_dir("fcoh_run_artifacts");
  const fs::path dataset = write_synth_dataset(dir);
  const RunConfig config = tiny_config(dataset, dir / "run");

  const std::vector<EvalReport> reports = cmd_train(config);
  // 160 samples at n_t=40 -> 4 stages, checkpoints at 2 and 4.
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].stage == 2);
  CHECK(reports[0].samples_seen == 80);
  CHECK(reports[1].stage == 4);
  CHECK(reports[1].samples_seen == 160);

  CHECK(fs::exists(dir / "run" / "config.txt"));
  CHECK(fs::exists(dir / "run" / "reports.jsonl"));
  CHECK(fs::exists(dir / "run" / "model.fcoh"));
  CHECK(fs::exists(dir / "run" / "auc.json"));

  // The checkpoint matches the model dimensions.
  const Checkpoint ckpt = load_checkpoint(dir / "run" / "model.fcoh");
  CHECK(ckpt.model.dim() == 12);
  CHECK(ckpt.model.bits() == 16);
  CHECK(ckpt.stats.entries().size() == 4);

  // Config echo parses back to the same run.
  const RunConfig echoed = RunConfig::from_file(dir / "run" / "config.txt");
  CHECK(echoed.dataset == config.dataset);
  CHECK(echoed.n_t == config.n_t);
  CHECK(echoed.seed == config.seed);
  CHECK(echoed.ks == config.ks);

  fs::remove_all(dir);
}

TEST_CASE("cmd_train is byte-deterministic apart from timings") {
  const fs::path dir = fresh_dir("fcoh_run_determinism");
  const fs::path dataset = write_synth_dataset(dir);

  RunConfig config_a = tiny_config(dataset, dir / "run_a");
  RunConfig config_b = tiny_config(dataset, dir / "run_b");
  cmd_train(config_a);
  cmd_train(config_b);

  CHECK(strip_timings(dir / "run_a" / "reports.jsonl") ==
        strip_timings(dir / "run_b" / "reports.jsonl"));

  // Checkpoints byte-identical.
  std::ifstream a(dir / "run_a" / "model.fcoh", std::ios::binary);
  std::ifstream b(dir / "run_b" / "model.fcoh", std::ios::binary);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());

  fs::remove_all(dir);
}

TEST_CASE("cmd_eval reproduces the final in-train report") {
  const fs::path dir = fresh_dir("fcoh_run_eval");
  const fs::path dataset = write_synth_dataset(dir);
  const RunConfig config = tiny_config(dataset, dir / "run");

  const std::vector<EvalReport> reports = cmd_train(config);
  const EvalReport oneshot = cmd_eval(dir / "run" / "model.fcoh", config);

  CHECK(oneshot.map == doctest::Approx(reports.back().map).epsilon(1e-15));
  CHECK(oneshot.precision_at_h2 ==
        doctest::Approx(reports.back().precision_at_h2).epsilon(1e-15));
  REQUIRE(oneshot.precision_at_k.size() ==
          reports.back().precision_at_k.size());
  for (std::size_t i = 0; i < oneshot.precision_at_k.size(); ++i) {
    CHECK(oneshot.precision_at_k[i].second ==
          doctest::Approx(reports.back().precision_at_k[i].second)
              .epsilon(1e-15));
  }
  fs::remove_all(dir);
}

TEST_CASE("cmd_eval rejects bad inputs distinctly") {
  const fs::path dir = fresh_dir("fcoh_run_eval_bad");
  const fs::path dataset = write_synth_dataset(dir);
  const RunConfig config = tiny_config(dataset, dir / "run");
  cmd_train(config);

  SUBCASE("corrupted checkpoint") {
    const fs::path bad = dir / "bad.fcoh";
    std::ofstream(bad, std::ios::binary) << "GARBAGE";
    CHECK_THROWS_AS(cmd_eval(bad, config), DataError);
  }
  SUBCASE("dimension mismatch") {
    SynthParams params;
    params.d = 7;
    params.classes = 4;
    params.per_class = 60;
    params.sep = 6.0;
    params.noise = 0.5;
    params.seed = 2;
    params.out = (dir / "other.fvec").string();
    cmd_synth(params);
    RunConfig other = config;
    other.dataset = params.out;
    other.train_size = 100;
    CHECK_THROWS_AS(cmd_eval(dir / "run" / "model.fcoh", other), UsageError);
  }
  fs::remove_all(dir);
}

TEST_CASE("cmd_train rejects a diverging run with a numeric error") {
  const fs::path dir = fresh_dir("fcoh_run_diverge");
  const fs::path dataset = write_synth_dataset(dir);
  RunConfig config = tiny_config(dataset, dir / "run");
  config.hp.mu = 1e18;  // guaranteed blow-up
  CHECK_THROWS_AS(cmd_train(config), NumericError);
  fs::remove_all(dir);
}

TEST_CASE("cmd_synth output round-trips and balances classes") {
  const fs::path dir = fresh_dir("fcoh_synth_out");
  SynthParams params;
  params.d = 6;
  params.classes = 5;
  params.per_class = 30;
  params.sep = 4.0;
  params.noise = 0.3;
  params.seed = 9;
  params.out = (dir / "s.fvec").string();
  cmd_synth(params);
  cmd_synth(params);  // overwriting with the same seed is stable

  const Dataset ds = load_features(params.out);
  CHECK(ds.dim() == 6);
  CHECK(ds.size() == 150);
  std::map<std::int32_t, std::size_t> counts;
  for (std::int32_t label : ds.labels) ++counts[label];
  REQUIRE(counts.size() == 5);
  for (const auto& [label, count] : counts) CHECK(count == 30);
  fs::remove_all(dir);
}

TEST_CASE("cmd_bench rows are consistent") {
  std::vector<BenchConfig> configs;
  for (std::size_t d : {8, 24}) {
    BenchConfig bc;
    bc.d = d;
    bc.n_t = 30;
    bc.r = 8;
    bc.batches = 2;
    bc.classes = 3;
    bc.db_size = 90;
    configs.push_back(bc);
  }
  std::ostringstream table;
  const std::vector<BenchRow> rows = cmd_bench(configs, 3, 1, &table);
  REQUIRE(rows.size() == 2);
  for (const BenchRow& row : rows) {
    CHECK(row.hash_fn_seconds >= 0.0);
    CHECK(row.hash_table_seconds >= 0.0);
    CHECK(row.total_seconds ==
          doctest::Approx(row.hash_fn_seconds + row.hash_table_seconds)
              .epsilon(1e-12));
  }
  CHECK(table.str().find("hash_fn_s") != std::string::npos);
  CHECK_THROWS_AS(cmd_bench(configs, 2, 1, nullptr), UsageError);
}

TEST_CASE("config file parsing") {
  const fs::path dir = fresh_dir("fcoh_config_parse");
  const fs::path path = dir / "run.cfg";
  std::ofstream(path) << "# comment\n"
                      << "dataset=features.fvec\n"
                      << "r=48\n"
                      << "lambda1=0.2\n"
                      << "mu=0.05\n"
                      << "n_t=250\n"
                      << "ks=1,10,100\n"
                      << "center_features=1\n"
                      << "out_dir=out\n";
  const RunConfig config = RunConfig::from_file(path);
  CHECK(config.dataset == "features.fvec");
  CHECK(config.r == 48);
  CHECK(config.hp.lambda1 == doctest::Approx(0.2));
  CHECK(config.hp.mu == doctest::Approx(0.05));
  CHECK(config.n_t == 250);
  CHECK(config.ks == std::vector<std::size_t>{1, 10, 100});
  CHECK(config.center_features);
  CHECK(config.out_dir == "out");

  std::ofstream(path) << "bogus_key=1\n";
  CHECK_THROWS_AS(RunConfig::from_file(path), UsageError);

  std::ofstream(path) << "no equals sign here\n";
  CHECK_THROWS_AS(RunConfig::from_file(path), UsageError);
  fs::remove_all(dir);
}

TEST_CASE("run config validation") {
  RunConfig config;
  CHECK_THROWS_AS(config.validate(), UsageError);  // no dataset

  const fs::path dir = fresh_dir("fcoh_config_validate");
  const fs::path dataset = write_synth_dataset(dir);
  config = tiny_config(dataset, dir / "run");
  CHECK_NOTHROW(config.validate());

  RunConfig both_queries = config;
  both_queries.query_total = 10;  // per-class already set
  CHECK_THROWS_AS(both_queries.validate(), UsageError);

  RunConfig bad_learner = config;
  bad_learner.learner = "magic";
  CHECK_THROWS_AS(bad_learner.validate(), UsageError);

  RunConfig missing_file = config;
  missing_file.dataset = "/nonexistent/path.fvec";
  CHECK_THROWS_AS(missing_file.validate(), DataError);
  fs::remove_all(dir);
}

TEST_CASE("lsh learner runs the same harness") {
  const fs::path dir = fresh_dir("fcoh_run_lsh");
  const fs::path dataset = write_synth_dataset(dir);
  RunConfig config = tiny_config(dataset, dir / "run");
  config.learner = "lsh";
  const std::vector<EvalReport> reports = cmd_train(config);
  REQUIRE(reports.size() == 2);
  // Untrained projections: the curve is flat.
  CHECK(reports[0].map == doctest::Approx(reports[1].map).epsilon(1e-15));
  fs::remove_all(dir);
}
