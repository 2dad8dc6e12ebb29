#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fcoh/matrix.hpp"
#include "fcoh/model.hpp"

namespace fcoh {

struct Dataset {
  Matrix features;  // d x n, one sample per column
  std::vector<std::int32_t> labels;
  std::string name;

  std::size_t dim() const { return features.rows(); }
  std::size_t size() const { return labels.size(); }
};

enum class FeatureFormat { fvec, csv };

// FVEC layout: "FVEC" magic, u32 version, u64 n, u64 d, n*d f32 features
// (sample-major), n i32 labels; little-endian. CSV: per line d floats then
// an integer label, comma-separated, no header.
Dataset load_features(const std::filesystem::path& path, FeatureFormat format);
// Format from extension: .fvec or .csv.
Dataset load_features(const std::filesystem::path& path);

void save_fvec(const std::filesystem::path& path, const Dataset& ds);
void save_csv(const std::filesystem::path& path, const Dataset& ds);

// Gaussian clusters: class c drawn from N(mu_c, noise^2 I) with pairwise
// center distances >= sep. Labels are 0..classes-1, per_class samples each,
// grouped by class.
Dataset synth_clusters(std::size_t d, std::size_t classes,
                       std::size_t per_class, double sep, double noise,
                       std::uint64_t seed);

struct SplitSpec {
  std::optional<std::size_t> query_per_class;
  std::optional<std::size_t> query_total;
  std::size_t train_size = 0;
};

struct Splits {
  Dataset retrieval;
  Dataset queries;
  Dataset train;  // sampled from the retrieval set
};

// Queries disjoint from retrieval; the training stream source is drawn from
// the retrieval set without replacement. Deterministic under seed.
Splits make_splits(const Dataset& ds, std::uint64_t seed,
                   const SplitSpec& spec);

struct StreamSpec {
  std::size_t batch_size = 100;  // n_t
  std::size_t total = 0;         // training samples delivered overall
  std::uint64_t seed = 0;

  void validate() const;
};

// Single pass over the training source: shuffled once by seed, chunked into
// batches of batch_size; a short final batch is delivered, not dropped.
class BatchStream {
 public:
  BatchStream(const Dataset& train, const StreamSpec& spec);

  std::optional<StreamBatch> next();
  std::size_t batches() const;
  std::size_t delivered() const { return cursor_; }

 private:
  const Dataset* ds_;
  StreamSpec spec_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

BatchStream stream(const Dataset& train, const StreamSpec& spec);

// Per-dimension mean of the columns (d x 1).
Matrix column_mean(const Matrix& x);
// Subtract a d x 1 mean from every column in place.
void center_columns(Matrix& x, const Matrix& mean);

}  // namespace fcoh
