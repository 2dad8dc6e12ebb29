#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fcoh/index.hpp"
#include "fcoh/matrix.hpp"

namespace fcoh {

// A database item is relevant to a query iff their class labels are equal.
// Table item ids index into db_labels.
struct GroundTruth {
  std::vector<std::int32_t> query_labels;
  std::vector<std::int32_t> db_labels;
};

// Per-stage metric record. Timings live in their own fields so determinism
// checks can drop them wholesale.
struct EvalReport {
  std::size_t stage = 0;
  std::size_t samples_seen = 0;
  double map = 0.0;
  std::optional<std::pair<std::size_t, double>> map_at;
  double precision_at_h2 = 0.0;
  std::vector<std::pair<std::size_t, double>> precision_at_k;
  double hash_fn_seconds = 0.0;
  double hash_table_seconds = 0.0;

  // One JSON object per line, stable key order; "timings" is a separate key.
  std::string to_json_line() const;
};

// AP over a full ranking of the database: (1/R) * sum of precision at each
// relevant rank, R = number of relevant items; 0 when R = 0.
double average_precision(const std::vector<bool>& ranked_relevant);

// Mean AP over queries (codes r x nq, entries {-1,+1}). With a cutoff K the
// ranking is truncated at K and the denominator becomes min(R, K).
double mean_ap(const Matrix& query_codes, const BinaryCodeTable& table,
               const GroundTruth& gt,
               std::optional<std::size_t> cutoff = std::nullopt);

// Mean over queries of the fraction of relevant items within Hamming radius
// 2; a query with an empty ball contributes 0.
double precision_at_h2(const Matrix& query_codes, const BinaryCodeTable& table,
                       const GroundTruth& gt);

// Mean fraction of relevant items among the top K, for each K.
std::vector<std::pair<std::size_t, double>> precision_at_k(
    const Matrix& query_codes, const BinaryCodeTable& table,
    const GroundTruth& gt, const std::vector<std::size_t>& ks);

// Trapezoidal area under the curve, normalized by the x span so a metric in
// [0,1] yields an area in [0,1]. x must be strictly increasing, >= 2 points.
double auc(const std::vector<std::pair<double, double>>& curve);

}  // namespace fcoh
