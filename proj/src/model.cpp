#include "fcoh/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "fcoh/errors.hpp"
#include "fcoh/rng.hpp"

namespace fcoh {

namespace block_stats {

namespace {
thread_local std::size_t g_peak_entries = 0;
}

void reset() { g_peak_entries = 0; }
std::size_t peak_entries() { return g_peak_entries; }
void note(std::size_t rows, std::size_t cols) {
  g_peak_entries = std::max(g_peak_entries, rows * cols);
}

}  // namespace block_stats

void Hyperparams::validate() const {
  if (!(mu > 0.0)) throw UsageError("Hyperparams: mu must be positive");
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw UsageError("Hyperparams: lambda1 and lambda2 must be nonnegative");
  }
}

HashModel init_model(std::size_t d, std::size_t r, std::uint64_t seed) {
  if (d == 0 || r == 0) {
    throw UsageError("init_model: dimensions must be positive");
  }
  Matrix w(d, r);
  Rng rng(seed);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w.data()[i] = rng.next_normal();
  }
  return HashModel(std::move(w));
}

Matrix encode_with(const Matrix& w, const Matrix& x) {
  if (w.rows() != x.rows()) {
    std::ostringstream os;
    os << "encode: feature dimension mismatch, weights " << w.rows() << "x"
       << w.cols() << " vs input " << x.rows() << "x" << x.cols();
    throw UsageError(os.str());
  }
  return sgn(transpose_matmul(w, x));
}

Matrix encode(const HashModel& model, const Matrix& x) {
  return encode_with(model.weights(), x);
}

std::vector<ClassPartition> partition_by_class(const StreamBatch& batch) {
  if (batch.size() == 0) {
    throw UsageError("partition_by_class: empty batch");
  }
  if (batch.labels.size() != batch.x.cols()) {
    throw UsageError("partition_by_class: label count does not match columns");
  }

  std::set<std::int32_t> classes(batch.labels.begin(), batch.labels.end());
  const std::size_t d = batch.x.rows();

  std::vector<ClassPartition> parts;
  parts.reserve(classes.size());
  for (std::int32_t c : classes) {
    std::vector<std::size_t> in, out;
    for (std::size_t j = 0; j < batch.labels.size(); ++j) {
      (batch.labels[j] == c ? in : out).push_back(j);
    }
    ClassPartition part;
    part.label = c;
    part.x_class = Matrix(d, in.size());
    part.x_rest = Matrix(d, out.size());
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < in.size(); ++j) {
        part.x_class(i, j) = batch.x(i, in[j]);
      }
      for (std::size_t j = 0; j < out.size(); ++j) {
        part.x_rest(i, j) = batch.x(i, out[j]);
      }
    }
    parts.push_back(std::move(part));
  }
  return parts;
}

void ClassRunningStats::update(std::int32_t label, const Matrix& x_class) {
  if (x_class.cols() == 0) {
    throw UsageError("ClassRunningStats: update with no samples");
  }
  Entry& e = stats_[label];
  const std::size_t d = x_class.rows();
  if (e.count == 0) {
    e.center = Matrix(d, 1);
  } else if (e.center.rows() != d) {
    throw UsageError("ClassRunningStats: feature dimension changed");
  }

  // center_t = (N_{t-1} * center_{t-1} + sum of new columns) / N_t
  const std::uint64_t n_new = x_class.cols();
  const std::uint64_t n_total = e.count + n_new;
  for (std::size_t i = 0; i < d; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < x_class.cols(); ++j) sum += x_class(i, j);
    e.center(i, 0) = (static_cast<double>(e.count) * e.center(i, 0) + sum) /
                     static_cast<double>(n_total);
  }
  e.count = n_total;
}

const ClassRunningStats::Entry* ClassRunningStats::find(
    std::int32_t label) const {
  auto it = stats_.find(label);
  return it == stats_.end() ? nullptr : &it->second;
}

void update_center(ClassRunningStats& stats, std::int32_t label,
                   const Matrix& x_class) {
  stats.update(label, x_class);
}

CodePair precompute_codes(const HashModel& prev, const Matrix& x_class,
                          const Matrix& x_rest) {
  CodePair codes;
  codes.same = encode(prev, x_class);
  codes.rest = x_rest.cols() == 0 ? Matrix(prev.bits(), 0)
                                  : encode(prev, x_rest);
  return codes;
}

namespace {

void check_class_shapes(const HashModel& prev, const Matrix& center,
                        const Matrix& x_class, const Matrix& codes_same,
                        const Matrix& codes_rest) {
  const std::size_t d = prev.dim();
  const std::size_t r = prev.bits();
  if (center.rows() != d || center.cols() != 1) {
    throw UsageError("class objective: center must be d x 1");
  }
  if (x_class.rows() != d) {
    throw UsageError("class objective: sample dimension mismatch");
  }
  if (codes_same.rows() != r || codes_same.cols() != x_class.cols()) {
    throw UsageError("class objective: same-class code shape mismatch");
  }
  if (codes_rest.cols() != 0 && codes_rest.rows() != r) {
    throw UsageError("class objective: rest code shape mismatch");
  }
}

}  // namespace

double class_loss(const HashModel& prev, const Matrix& center,
                  const Matrix& x_class, const Matrix& codes_same,
                  const Matrix& codes_rest, const Hyperparams& hp) {
  check_class_shapes(prev, center, x_class, codes_same, codes_rest);
  const double r = static_cast<double>(prev.bits());

  // Quantization of the class center: || |W^T c| - 1 ||_1.
  const Matrix proj_center = transpose_matmul(prev.weights(), center);
  double loss = 0.0;
  for (std::size_t i = 0; i < proj_center.size(); ++i) {
    loss += std::abs(std::abs(proj_center.data()[i]) - 1.0);
  }

  const Matrix proj = transpose_matmul(prev.weights(), x_class);  // r x n

  if (hp.lambda1 != 0.0 && codes_same.cols() > 0) {
    Matrix block = transpose_matmul(proj, codes_same);  // n x n
    block_stats::note(block.rows(), block.cols());
    const Matrix resid = add_scalar(block, -r);
    const double f = resid.frobenius_norm();
    loss += hp.lambda1 * f * f;
  }
  if (hp.lambda2 != 0.0 && codes_rest.cols() > 0) {
    Matrix block = transpose_matmul(proj, codes_rest);  // n x n_rest
    block_stats::note(block.rows(), block.cols());
    const Matrix resid = add_scalar(block, r);
    const double f = resid.frobenius_norm();
    loss += hp.lambda2 * f * f;
  }
  return loss;
}

Matrix class_gradient(const HashModel& prev, const Matrix& center,
                      const Matrix& x_class, const Matrix& codes_same,
                      const Matrix& codes_rest, const Hyperparams& hp) {
  check_class_shapes(prev, center, x_class, codes_same, codes_rest);
  const double r = static_cast<double>(prev.bits());

  const Matrix proj_center = transpose_matmul(prev.weights(), center);
  Matrix grad = matmul(center, transpose(sigma(proj_center)));  // d x r

  const Matrix proj = transpose_matmul(prev.weights(), x_class);

  if (hp.lambda1 != 0.0 && codes_same.cols() > 0) {
    Matrix block = transpose_matmul(proj, codes_same);
    block_stats::note(block.rows(), block.cols());
    const Matrix resid = add_scalar(block, -r);
    const Matrix term = matmul(matmul(x_class, resid), transpose(codes_same));
    axpy(grad, 2.0 * hp.lambda1, term);
  }
  if (hp.lambda2 != 0.0 && codes_rest.cols() > 0) {
    Matrix block = transpose_matmul(proj, codes_rest);
    block_stats::note(block.rows(), block.cols());
    const Matrix resid = add_scalar(block, r);
    const Matrix term = matmul(matmul(x_class, resid), transpose(codes_rest));
    axpy(grad, 2.0 * hp.lambda2, term);
  }
  return grad;
}

HashModel sgd_step(const HashModel& prev, const Matrix& grad, double mu) {
  if (grad.rows() != prev.dim() || grad.cols() != prev.bits()) {
    throw UsageError("sgd_step: gradient shape does not match weights");
  }
  Matrix w = prev.weights();
  axpy(w, -mu, grad);
  return HashModel(std::move(w));
}

TrainTrace train_batch(HashModel& model, ClassRunningStats& stats,
                       const StreamBatch& batch, const Hyperparams& hp,
                       const TrainOptions& opts) {
  hp.validate();
  if (batch.size() == 0) throw UsageError("train_batch: empty batch");
  if (batch.x.rows() != model.dim()) {
    throw UsageError("train_batch: feature dimension does not match model");
  }

  const std::vector<ClassPartition> parts = partition_by_class(batch);

  // Optional variant: freeze every subprocess's code matrices against the
  // weights the batch arrived with.
  std::vector<CodePair> stale_codes;
  if (opts.codes_from_batch_start) {
    stale_codes.reserve(parts.size());
    for (const ClassPartition& part : parts) {
      stale_codes.push_back(precompute_codes(model, part.x_class, part.x_rest));
    }
  }

  TrainTrace trace;
  trace.reserve(parts.size());
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const ClassPartition& part = parts[pi];
    const auto start = std::chrono::steady_clock::now();

    stats.update(part.label, part.x_class);
    const Matrix& center = stats.find(part.label)->center;

    const CodePair codes =
        opts.codes_from_batch_start
            ? stale_codes[pi]
            : precompute_codes(model, part.x_class, part.x_rest);

    SubprocessTrace entry;
    entry.label = part.label;
    entry.loss = class_loss(model, center, part.x_class, codes.same,
                            codes.rest, hp);
    const Matrix grad = class_gradient(model, center, part.x_class, codes.same,
                                       codes.rest, hp);
    entry.grad_norm = grad.frobenius_norm();
    model = sgd_step(model, grad, hp.mu);

    entry.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    trace.push_back(entry);
  }
  return trace;
}

double storage_saving_rate(std::size_t n_class, std::size_t n_rest) {
  const std::size_t n_total = n_class + n_rest;
  if (n_total == 0) throw UsageError("storage_saving_rate: empty batch");
  const double nt = static_cast<double>(n_total);
  return 1.0 - static_cast<double>(n_class) * static_cast<double>(n_rest) /
                   (nt * nt);
}

}  // namespace fcoh
