#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fcoh/matrix.hpp"
#include "fcoh/model.hpp"

namespace fcoh {

using PackedCode = std::vector<std::uint64_t>;

// Immutable store of bit-packed binary codes. Bit i of an item is set iff
// code entry i is +1; unused high bits of the last word stay zero. Queries
// are exhaustive scans with word-wise popcount.
class BinaryCodeTable {
 public:
  BinaryCodeTable() = default;

  // codes: r x n with entries in {-1, +1}; ids one per column; labels
  // optional (empty or one per column).
  static BinaryCodeTable build(const Matrix& codes,
                               std::vector<std::int64_t> ids,
                               std::vector<std::int32_t> labels = {});

  std::size_t size() const { return ids_.size(); }
  std::size_t bits() const { return bits_; }
  std::size_t words_per_code() const { return words_; }

  std::span<const std::uint64_t> packed(std::size_t item) const {
    return {words_data_.data() + item * words_, words_};
  }
  std::int64_t id(std::size_t item) const { return ids_[item]; }
  bool has_labels() const { return !labels_.empty(); }
  std::int32_t label(std::size_t item) const { return labels_[item]; }

  // Exact inverse of the packing: the {-1,+1} column the item was built from.
  std::vector<double> unpack(std::size_t item) const;

  void dump(const std::filesystem::path& path) const;
  static BinaryCodeTable load(const std::filesystem::path& path);

 private:
  std::size_t bits_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> words_data_;  // n * words_
  std::vector<std::int64_t> ids_;
  std::vector<std::int32_t> labels_;
};

// Pack one {-1,+1} column of a code matrix.
PackedCode pack_code(const Matrix& codes, std::size_t column);

// Number of differing bits; operands must have equal word counts.
std::size_t hamming(std::span<const std::uint64_t> a,
                    std::span<const std::uint64_t> b);

struct QueryResult {
  struct Hit {
    std::int64_t id = 0;
    std::uint32_t distance = 0;
  };
  // Distances nondecreasing, ties broken by ascending id.
  std::vector<Hit> hits;
};

// Every item within the given Hamming radius.
QueryResult radius_query(const BinaryCodeTable& table,
                         std::span<const std::uint64_t> query,
                         std::size_t radius);

// The k nearest items (all of them when the table is smaller); k >= 1.
QueryResult topk_query(const BinaryCodeTable& table,
                       std::span<const std::uint64_t> query, std::size_t k);

// Full re-encode of x under the current model. Callers time this separately
// from hash-function updates and swap the returned table in themselves.
BinaryCodeTable rebuild(const HashModel& model, const Matrix& x,
                        std::vector<std::int64_t> ids,
                        std::vector<std::int32_t> labels = {});

}  // namespace fcoh
