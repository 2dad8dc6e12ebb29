#pragma once

#include <cstdint>

#include "fcoh/matrix.hpp"

namespace fcoh {

// Random-projection LSH: Gaussian hyperplanes fixed at construction, never
// trained. Shares the sign-projection encode path so comparisons against the
// learned model isolate the learning rule.
class LshModel {
 public:
  LshModel() = default;
  explicit LshModel(Matrix w) : w_(std::move(w)) {}

  std::size_t dim() const { return w_.rows(); }
  std::size_t bits() const { return w_.cols(); }
  const Matrix& weights() const { return w_; }

 private:
  Matrix w_;  // d x r
};

LshModel lsh_init(std::size_t d, std::size_t r, std::uint64_t seed);
Matrix lsh_encode(const LshModel& model, const Matrix& x);

}  // namespace fcoh
