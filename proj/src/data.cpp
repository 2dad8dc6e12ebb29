#include "fcoh/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "fcoh/errors.hpp"
#include "fcoh/io_util.hpp"
#include "fcoh/rng.hpp"

namespace fcoh {

namespace {

constexpr std::uint32_t kFvecVersion = 1;

void check_features_finite(const Dataset& ds,
                           const std::filesystem::path& path) {
  if (!ds.features.all_finite()) {
    throw DataError("non-finite feature values in " + path.string());
  }
}

Dataset load_fvec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "FVEC") {
    throw DataError("bad magic in " + path.string() + ", expected FVEC");
  }
  const std::uint32_t version = io::read_u32(in, path, "version");
  if (version != kFvecVersion) {
    throw DataError("unsupported FVEC version in " + path.string());
  }
  const std::uint64_t n = io::read_u64(in, path, "sample count");
  const std::uint64_t d = io::read_u64(in, path, "feature dimension");

  Dataset ds;
  ds.name = path.stem().string();
  ds.features = Matrix(d, n);
  for (std::uint64_t j = 0; j < n; ++j) {
    for (std::uint64_t i = 0; i < d; ++i) {
      ds.features(i, j) =
          static_cast<double>(io::read_f32(in, path, "features"));
    }
  }
  ds.labels.resize(n);
  for (std::uint64_t j = 0; j < n; ++j) {
    ds.labels[j] = io::read_i32(in, path, "labels");
    if (ds.labels[j] < 0) {
      throw DataError("negative class label in " + path.string());
    }
  }
  check_features_finite(ds, path);
  return ds;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::vector<std::int32_t> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        fields.push_back(std::stod(cell));
      } catch (const std::exception&) {
        std::ostringstream os;
        os << path.string() << ":" << lineno << ": cannot parse '" << cell
           << "'";
        throw DataError(os.str());
      }
    }
    if (fields.size() < 2) {
      std::ostringstream os;
      os << path.string() << ":" << lineno
         << ": need at least one feature and a label";
      throw DataError(os.str());
    }
    const double raw_label = fields.back();
    fields.pop_back();
    if (raw_label != std::floor(raw_label) || raw_label < 0) {
      std::ostringstream os;
      os << path.string() << ":" << lineno << ": label must be a nonnegative "
         << "integer, got " << raw_label;
      throw DataError(os.str());
    }
    if (!rows.empty() && fields.size() != rows.front().size()) {
      std::ostringstream os;
      os << path.string() << ":" << lineno << ": feature count "
         << fields.size() << " does not match first line "
         << rows.front().size();
      throw DataError(os.str());
    }
    rows.push_back(std::move(fields));
    labels.push_back(static_cast<std::int32_t>(raw_label));
  }
  if (rows.empty()) throw DataError("no samples in " + path.string());

  Dataset ds;
  ds.name = path.stem().string();
  ds.features = Matrix(rows.front().size(), rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i < rows[j].size(); ++i) {
      ds.features(i, j) = rows[j][i];
    }
  }
  ds.labels = std::move(labels);
  check_features_finite(ds, path);
  return ds;
}

Dataset take_columns(const Dataset& ds, const std::vector<std::size_t>& idx,
                     const std::string& name) {
  Dataset out;
  out.name = name;
  out.features = Matrix(ds.dim(), idx.size());
  out.labels.resize(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    for (std::size_t i = 0; i < ds.dim(); ++i) {
      out.features(i, j) = ds.features(i, idx[j]);
    }
    out.labels[j] = ds.labels[idx[j]];
  }
  return out;
}

}  // namespace

Dataset load_features(const std::filesystem::path& path,
                      FeatureFormat format) {
  switch (format) {
    case FeatureFormat::fvec:
      return load_fvec(path);
    case FeatureFormat::csv:
      return load_csv(path);
  }
  throw UsageError("load_features: unknown format");
}

Dataset load_features(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".fvec") return load_fvec(path);
  if (ext == ".csv") return load_csv(path);
  throw UsageError("load_features: cannot infer format from '" + ext +
                   "', expected .fvec or .csv");
}

void save_fvec(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write("FVEC", 4);
  io::write_u32(out, kFvecVersion);
  io::write_u64(out, ds.size());
  io::write_u64(out, ds.dim());
  for (std::size_t j = 0; j < ds.size(); ++j) {
    for (std::size_t i = 0; i < ds.dim(); ++i) {
      io::write_f32(out, static_cast<float>(ds.features(i, j)));
    }
  }
  for (std::int32_t label : ds.labels) io::write_i32(out, label);
  if (!out) throw DataError("write failed for " + path.string());
}

void save_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t j = 0; j < ds.size(); ++j) {
    for (std::size_t i = 0; i < ds.dim(); ++i) {
      out << ds.features(i, j) << ',';
    }
    out << ds.labels[j] << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

Dataset synth_clusters(std::size_t d, std::size_t classes,
                       std::size_t per_class, double sep, double noise,
                       std::uint64_t seed) {
  if (d == 0 || classes == 0 || per_class == 0) {
    throw UsageError("synth_clusters: d, classes and per_class must be "
                     "positive");
  }
  if (!(sep > 0.0) || noise < 0.0) {
    throw UsageError("synth_clusters: sep must be positive, noise nonneg");
  }
  Rng rng(seed);

  // Draw centers, then scale them so the smallest pairwise distance is
  // exactly sep (no scaling needed for a single class).
  Matrix centers(d, classes);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    centers.data()[i] = rng.next_normal();
  }
  if (classes > 1) {
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < classes; ++a) {
      for (std::size_t b = a + 1; b < classes; ++b) {
        double sq = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          const double diff = centers(i, a) - centers(i, b);
          sq += diff * diff;
        }
        min_dist = std::min(min_dist, std::sqrt(sq));
      }
    }
    const double scale = sep / min_dist;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      centers.data()[i] *= scale;
    }
  }

  Dataset ds;
  ds.name = "synth";
  ds.features = Matrix(d, classes * per_class);
  ds.labels.resize(classes * per_class);
  std::size_t col = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t s = 0; s < per_class; ++s, ++col) {
      for (std::size_t i = 0; i < d; ++i) {
        ds.features(i, col) = centers(i, c) + noise * rng.next_normal();
      }
      ds.labels[col] = static_cast<std::int32_t>(c);
    }
  }
  return ds;
}

Splits make_splits(const Dataset& ds, std::uint64_t seed,
                   const SplitSpec& spec) {
  if (spec.query_per_class.has_value() == spec.query_total.has_value()) {
    throw UsageError(
        "make_splits: exactly one of query_per_class / query_total required");
  }

  Rng rng(seed);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::vector<std::size_t> query_idx;
  std::vector<std::size_t> retrieval_idx;
  if (spec.query_per_class) {
    const std::size_t per_class = *spec.query_per_class;
    std::map<std::int32_t, std::size_t> taken;
    for (std::size_t pos : order) {
      if (taken[ds.labels[pos]] < per_class) {
        ++taken[ds.labels[pos]];
        query_idx.push_back(pos);
      } else {
        retrieval_idx.push_back(pos);
      }
    }
    for (const auto& [label, count] : taken) {
      if (count < per_class) {
        std::ostringstream os;
        os << "make_splits: class " << label << " has only " << count
           << " samples, need " << per_class << " queries";
        throw DataError(os.str());
      }
    }
  } else {
    const std::size_t total = *spec.query_total;
    if (total >= ds.size()) {
      throw UsageError("make_splits: query_total leaves no retrieval set");
    }
    query_idx.assign(order.begin(), order.begin() + total);
    retrieval_idx.assign(order.begin() + total, order.end());
  }

  if (spec.train_size == 0 || spec.train_size > retrieval_idx.size()) {
    std::ostringstream os;
    os << "make_splits: train_size " << spec.train_size
       << " infeasible for retrieval set of " << retrieval_idx.size();
    throw UsageError(os.str());
  }

  // Training stream: sampled from the retrieval set without replacement.
  std::vector<std::size_t> train_pool = retrieval_idx;
  rng.shuffle(train_pool);
  train_pool.resize(spec.train_size);

  Splits splits;
  splits.retrieval = take_columns(ds, retrieval_idx, ds.name + ".retrieval");
  splits.queries = take_columns(ds, query_idx, ds.name + ".queries");
  splits.train = take_columns(ds, train_pool, ds.name + ".train");
  return splits;
}

void StreamSpec::validate() const {
  if (batch_size == 0) throw UsageError("StreamSpec: batch_size must be >= 1");
  if (total == 0) throw UsageError("StreamSpec: total must be >= 1");
  if (batch_size > total) {
    throw UsageError("StreamSpec: batch_size exceeds total");
  }
}

BatchStream::BatchStream(const Dataset& train, const StreamSpec& spec)
    : ds_(&train), spec_(spec) {
  spec_.total = std::min(spec_.total, train.size());
  spec_.validate();
  order_.resize(train.size());
  std::iota(order_.begin(), order_.end(), 0);
  Rng rng(spec_.seed);
  rng.shuffle(order_);
  order_.resize(spec_.total);
}

std::optional<StreamBatch> BatchStream::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  const std::size_t take = std::min(spec_.batch_size, order_.size() - cursor_);
  StreamBatch batch;
  batch.x = Matrix(ds_->dim(), take);
  batch.labels.resize(take);
  for (std::size_t j = 0; j < take; ++j) {
    const std::size_t src = order_[cursor_ + j];
    for (std::size_t i = 0; i < ds_->dim(); ++i) {
      batch.x(i, j) = ds_->features(i, src);
    }
    batch.labels[j] = ds_->labels[src];
  }
  cursor_ += take;
  return batch;
}

std::size_t BatchStream::batches() const {
  return (order_.size() + spec_.batch_size - 1) / spec_.batch_size;
}

BatchStream stream(const Dataset& train, const StreamSpec& spec) {
  return BatchStream(train, spec);
}

Matrix column_mean(const Matrix& x) {
  if (x.cols() == 0) throw UsageError("column_mean: no columns");
  Matrix mean(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) sum += x(i, j);
    mean(i, 0) = sum / static_cast<double>(x.cols());
  }
  return mean;
}

void center_columns(Matrix& x, const Matrix& mean) {
  if (mean.rows() != x.rows() || mean.cols() != 1) {
    throw UsageError("center_columns: mean must be d x 1");
  }
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double m = mean(i, 0);
    for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= m;
  }
}

}  // namespace fcoh
