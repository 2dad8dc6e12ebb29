#include "fcoh/index.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>

#include "fcoh/errors.hpp"
#include "fcoh/io_util.hpp"

namespace fcoh {

namespace {

std::size_t words_for_bits(std::size_t bits) { return (bits + 63) / 64; }

void pack_column_into(const Matrix& codes, std::size_t column,
                      std::uint64_t* out, std::size_t words) {
  for (std::size_t w = 0; w < words; ++w) out[w] = 0;
  for (std::size_t i = 0; i < codes.rows(); ++i) {
    const double v = codes(i, column);
    if (v != 1.0 && v != -1.0) {
      std::ostringstream os;
      os << "pack_code: entry (" << i << "," << column << ") is " << v
         << ", expected -1 or +1";
      throw UsageError(os.str());
    }
    if (v == 1.0) out[i / 64] |= (std::uint64_t{1} << (i % 64));
  }
}

}  // namespace

BinaryCodeTable BinaryCodeTable::build(const Matrix& codes,
                                       std::vector<std::int64_t> ids,
                                       std::vector<std::int32_t> labels) {
  const std::size_t n = codes.cols();
  if (ids.size() != n) {
    throw UsageError("BinaryCodeTable: id count does not match code columns");
  }
  if (!labels.empty() && labels.size() != n) {
    throw UsageError("BinaryCodeTable: label count does not match columns");
  }
  BinaryCodeTable table;
  table.bits_ = codes.rows();
  table.words_ = words_for_bits(codes.rows());
  table.words_data_.assign(n * table.words_, 0);
  for (std::size_t j = 0; j < n; ++j) {
    pack_column_into(codes, j, table.words_data_.data() + j * table.words_,
                     table.words_);
  }
  table.ids_ = std::move(ids);
  table.labels_ = std::move(labels);
  return table;
}

std::vector<double> BinaryCodeTable::unpack(std::size_t item) const {
  std::vector<double> out(bits_);
  const std::uint64_t* words = words_data_.data() + item * words_;
  for (std::size_t i = 0; i < bits_; ++i) {
    out[i] = (words[i / 64] >> (i % 64)) & 1 ? 1.0 : -1.0;
  }
  return out;
}

PackedCode pack_code(const Matrix& codes, std::size_t column) {
  PackedCode out(words_for_bits(codes.rows()));
  pack_column_into(codes, column, out.data(), out.size());
  return out;
}

std::size_t hamming(std::span<const std::uint64_t> a,
                    std::span<const std::uint64_t> b) {
  if (a.size() != b.size()) {
    throw UsageError("hamming: packed code lengths differ");
  }
  std::size_t dist = 0;
  for (std::size_t w = 0; w < a.size(); ++w) {
    dist += static_cast<std::size_t>(std::popcount(a[w] ^ b[w]));
  }
  return dist;
}

namespace {

void sort_hits(std::vector<QueryResult::Hit>& hits) {
  std::sort(hits.begin(), hits.end(),
            [](const QueryResult::Hit& a, const QueryResult::Hit& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              return a.id < b.id;
            });
}

}  // namespace

QueryResult radius_query(const BinaryCodeTable& table,
                         std::span<const std::uint64_t> query,
                         std::size_t radius) {
  QueryResult result;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::size_t d = hamming(table.packed(i), query);
    if (d <= radius) {
      result.hits.push_back({table.id(i), static_cast<std::uint32_t>(d)});
    }
  }
  sort_hits(result.hits);
  return result;
}

QueryResult topk_query(const BinaryCodeTable& table,
                       std::span<const std::uint64_t> query, std::size_t k) {
  if (k == 0) throw UsageError("topk_query: k must be at least 1");
  QueryResult result;
  result.hits.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::size_t d = hamming(table.packed(i), query);
    result.hits.push_back({table.id(i), static_cast<std::uint32_t>(d)});
  }
  sort_hits(result.hits);
  if (result.hits.size() > k) result.hits.resize(k);
  return result;
}

BinaryCodeTable rebuild(const HashModel& model, const Matrix& x,
                        std::vector<std::int64_t> ids,
                        std::vector<std::int32_t> labels) {
  if (x.cols() == 0) {
    return BinaryCodeTable::build(Matrix(model.bits(), 0), std::move(ids),
                                  std::move(labels));
  }
  return BinaryCodeTable::build(encode(model, x), std::move(ids),
                                std::move(labels));
}

// Dump layout: "FCTB", u64 bits, u64 items, packed words, then ids;
// everything little-endian.
void BinaryCodeTable::dump(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("table dump: cannot open " + path.string());
  out.write("FCTB", 4);
  io::write_u64(out, bits_);
  io::write_u64(out, ids_.size());
  for (std::uint64_t w : words_data_) io::write_u64(out, w);
  for (std::int64_t id : ids_) io::write_i64(out, id);
  if (!out) throw DataError("table dump: write failed for " + path.string());
}

BinaryCodeTable BinaryCodeTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("table load: cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "FCTB") {
    throw DataError("table load: bad magic in " + path.string());
  }
  BinaryCodeTable table;
  table.bits_ = io::read_u64(in, path, "bits");
  table.words_ = words_for_bits(table.bits_);
  const std::uint64_t n = io::read_u64(in, path, "item count");
  table.words_data_.resize(n * table.words_);
  for (std::uint64_t& w : table.words_data_) {
    w = io::read_u64(in, path, "packed words");
  }
  table.ids_.resize(n);
  for (std::int64_t& id : table.ids_) id = io::read_i64(in, path, "ids");
  return table;
}

}  // namespace fcoh
