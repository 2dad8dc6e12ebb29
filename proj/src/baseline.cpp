#include "fcoh/baseline.hpp"

#include "fcoh/model.hpp"

namespace fcoh {

LshModel lsh_init(std::size_t d, std::size_t r, std::uint64_t seed) {
  return LshModel(init_model(d, r, seed).weights());
}

Matrix lsh_encode(const LshModel& model, const Matrix& x) {
  return encode_with(model.weights(), x);
}

}  // namespace fcoh
