#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "fcoh/matrix.hpp"

namespace fcoh {

// Learned hash functions: r linear projections whose signs give r-bit codes.
class HashModel {
 public:
  HashModel() = default;
  explicit HashModel(Matrix w) : w_(std::move(w)) {}

  std::size_t dim() const { return w_.rows(); }
  std::size_t bits() const { return w_.cols(); }
  const Matrix& weights() const { return w_; }
  Matrix& weights() { return w_; }

 private:
  Matrix w_;  // d x r
};

struct Hyperparams {
  double lambda1 = 0.1;   // weight of the similar-pair term
  double lambda2 = 0.01;  // weight of the dissimilar-pair term
  double mu = 0.01;       // SGD learning rate
  std::size_t batch_hint = 100;

  void validate() const;  // mu > 0, lambdas >= 0
};

// One stage of the stream: feature columns plus a class id per column.
struct StreamBatch {
  Matrix x;  // d x n, one sample per column
  std::vector<std::int32_t> labels;

  std::size_t size() const { return labels.size(); }
};

// Cumulative per-class sample counts and running centers across all stages.
class ClassRunningStats {
 public:
  struct Entry {
    std::uint64_t count = 0;
    Matrix center;  // d x 1 mean of every sample of this class seen so far
  };

  void update(std::int32_t label, const Matrix& x_class);
  const Entry* find(std::int32_t label) const;
  const std::map<std::int32_t, Entry>& entries() const { return stats_; }
  std::map<std::int32_t, Entry>& entries() { return stats_; }

 private:
  std::map<std::int32_t, Entry> stats_;
};

// One class against the rest of its batch; column order preserved.
struct ClassPartition {
  std::int32_t label = 0;
  Matrix x_class;  // d x n_class
  Matrix x_rest;   // d x n_rest (d x 0 for a single-class batch)
};

// Constant code matrices frozen before a gradient step.
struct CodePair {
  Matrix same;  // codes of the class's own samples, r x n_class
  Matrix rest;  // codes of the remaining samples, r x n_rest
};

struct SubprocessTrace {
  std::int32_t label = 0;
  double loss = 0.0;
  double seconds = 0.0;
  double grad_norm = 0.0;
};
using TrainTrace = std::vector<SubprocessTrace>;

struct TrainOptions {
  // When set, the constant code matrices of every subprocess in a batch are
  // computed from the weights as they stood when the batch arrived, instead
  // of from the weights at the start of each subprocess.
  bool codes_from_batch_start = false;
};

HashModel init_model(std::size_t d, std::size_t r, std::uint64_t seed);

// B = sgn(W^T X), r x n, entries in {-1, +1}.
Matrix encode(const HashModel& model, const Matrix& x);
Matrix encode_with(const Matrix& w, const Matrix& x);

// Classes emitted in ascending label order.
std::vector<ClassPartition> partition_by_class(const StreamBatch& batch);

void update_center(ClassRunningStats& stats, std::int32_t label,
                   const Matrix& x_class);

CodePair precompute_codes(const HashModel& prev, const Matrix& x_class,
                          const Matrix& x_rest);

// Objective of one class subprocess at the given weights, with the code
// matrices held constant:
//   || |W^T c| - 1 ||_1
//   + lambda1 * || (W^T Xc)^T Bsame - r ||_F^2
//   + lambda2 * || (W^T Xc)^T Brest + r ||_F^2
// where r broadcasts entrywise.
double class_loss(const HashModel& prev, const Matrix& center,
                  const Matrix& x_class, const Matrix& codes_same,
                  const Matrix& codes_rest, const Hyperparams& hp);

// Analytic gradient of class_loss w.r.t. W, shape d x r:
//   c * sigma(W^T c)^T
//   + 2*lambda1 * Xc ((W^T Xc)^T Bsame - r) Bsame^T
//   + 2*lambda2 * Xc ((W^T Xc)^T Brest + r) Brest^T
Matrix class_gradient(const HashModel& prev, const Matrix& center,
                      const Matrix& x_class, const Matrix& codes_same,
                      const Matrix& codes_rest, const Hyperparams& hp);

HashModel sgd_step(const HashModel& prev, const Matrix& grad, double mu);

// Runs one subprocess per class present in the batch, ascending label order,
// each seeing the weights left by the previous one: update the running
// center, freeze the code matrices, take one SGD step.
TrainTrace train_batch(HashModel& model, ClassRunningStats& stats,
                       const StreamBatch& batch, const Hyperparams& hp,
                       const TrainOptions& opts = {});

// R = 1 - n_class * n_rest / (n_class + n_rest)^2, in [0.75, 1].
double storage_saving_rate(std::size_t n_class, std::size_t n_rest);

// Thread-local high-water mark over the sizes of materialized sample-pair
// inner-product blocks (the n_class x n_class and n_class x n_rest products).
namespace block_stats {
void reset();
std::size_t peak_entries();
void note(std::size_t rows, std::size_t cols);
}  // namespace block_stats

}  // namespace fcoh
