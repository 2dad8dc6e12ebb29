#include "fcoh/eval.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "fcoh/errors.hpp"

namespace fcoh {

namespace {

void check_query_setup(const Matrix& query_codes, const BinaryCodeTable& table,
                       const GroundTruth& gt) {
  if (query_codes.cols() == 0) {
    throw UsageError("eval: at least one query required");
  }
  if (query_codes.rows() != table.bits()) {
    throw UsageError("eval: query code length does not match table");
  }
  if (gt.query_labels.size() != query_codes.cols()) {
    throw UsageError("eval: query label count mismatch");
  }
  if (gt.db_labels.size() != table.size()) {
    throw UsageError("eval: database label count mismatch");
  }
}

}  // namespace

double average_precision(const std::vector<bool>& ranked_relevant) {
  if (ranked_relevant.empty()) {
    throw UsageError("average_precision: empty ranking");
  }
  std::size_t relevant_total = 0;
  for (bool rel : ranked_relevant) relevant_total += rel ? 1 : 0;
  if (relevant_total == 0) return 0.0;

  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < ranked_relevant.size(); ++rank) {
    if (ranked_relevant[rank]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum / static_cast<double>(relevant_total);
}

double mean_ap(const Matrix& query_codes, const BinaryCodeTable& table,
               const GroundTruth& gt, std::optional<std::size_t> cutoff) {
  check_query_setup(query_codes, table, gt);
  const std::size_t nq = query_codes.cols();

  double total = 0.0;
  for (std::size_t q = 0; q < nq; ++q) {
    const PackedCode packed = pack_code(query_codes, q);
    const QueryResult ranking = topk_query(table, packed, table.size());

    std::size_t relevant_total = 0;
    for (const QueryResult::Hit& hit : ranking.hits) {
      if (gt.db_labels[hit.id] == gt.query_labels[q]) ++relevant_total;
    }
    if (relevant_total == 0) continue;  // AP 0, query still counted

    const std::size_t depth =
        cutoff ? std::min(*cutoff, ranking.hits.size()) : ranking.hits.size();
    const std::size_t denom =
        cutoff ? std::min(relevant_total, *cutoff) : relevant_total;

    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t rank = 0; rank < depth; ++rank) {
      if (gt.db_labels[ranking.hits[rank].id] == gt.query_labels[q]) {
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
      }
    }
    total += sum / static_cast<double>(denom);
  }
  return total / static_cast<double>(nq);
}

double precision_at_h2(const Matrix& query_codes, const BinaryCodeTable& table,
                       const GroundTruth& gt) {
  check_query_setup(query_codes, table, gt);
  const std::size_t nq = query_codes.cols();

  double total = 0.0;
  for (std::size_t q = 0; q < nq; ++q) {
    const PackedCode packed = pack_code(query_codes, q);
    const QueryResult ball = radius_query(table, packed, 2);
    if (ball.hits.empty()) continue;  // empty ball contributes 0
    std::size_t relevant = 0;
    for (const QueryResult::Hit& hit : ball.hits) {
      if (gt.db_labels[hit.id] == gt.query_labels[q]) ++relevant;
    }
    total += static_cast<double>(relevant) /
             static_cast<double>(ball.hits.size());
  }
  return total / static_cast<double>(nq);
}

std::vector<std::pair<std::size_t, double>> precision_at_k(
    const Matrix& query_codes, const BinaryCodeTable& table,
    const GroundTruth& gt, const std::vector<std::size_t>& ks) {
  check_query_setup(query_codes, table, gt);
  if (ks.empty()) throw UsageError("precision_at_k: no K values given");
  for (std::size_t k : ks) {
    if (k < 1) throw UsageError("precision_at_k: K must be at least 1");
  }
  const std::size_t nq = query_codes.cols();
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());

  std::vector<double> totals(ks.size(), 0.0);
  for (std::size_t q = 0; q < nq; ++q) {
    const PackedCode packed = pack_code(query_codes, q);
    const QueryResult top = topk_query(table, packed, max_k);
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const std::size_t depth = std::min(ks[ki], top.hits.size());
      if (depth == 0) continue;
      std::size_t relevant = 0;
      for (std::size_t rank = 0; rank < depth; ++rank) {
        if (gt.db_labels[top.hits[rank].id] == gt.query_labels[q]) ++relevant;
      }
      totals[ki] += static_cast<double>(relevant) / static_cast<double>(depth);
    }
  }

  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(ks.size());
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    out.emplace_back(ks[ki], totals[ki] / static_cast<double>(nq));
  }
  return out;
}

double auc(const std::vector<std::pair<double, double>>& curve) {
  if (curve.size() < 2) throw UsageError("auc: need at least two points");
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (!(curve[i].first > curve[i - 1].first)) {
      throw UsageError("auc: x values must be strictly increasing");
    }
  }
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += 0.5 * (curve[i].second + curve[i - 1].second) *
            (curve[i].first - curve[i - 1].first);
  }
  return area / (curve.back().first - curve.front().first);
}

std::string EvalReport::to_json_line() const {
  nlohmann::ordered_json j;
  j["stage"] = stage;
  j["samples_seen"] = samples_seen;
  j["map"] = map;
  if (map_at) {
    j["map_cutoff"] = map_at->first;
    j["map_at"] = map_at->second;
  }
  j["precision_at_h2"] = precision_at_h2;
  nlohmann::ordered_json pk = nlohmann::ordered_json::array();
  for (const auto& [k, value] : precision_at_k) {
    pk.push_back({{"k", k}, {"precision", value}});
  }
  j["precision_at_k"] = pk;
  j["timings"] = {{"hash_fn_seconds", hash_fn_seconds},
                  {"hash_table_seconds", hash_table_seconds}};
  return j.dump();
}

}  // namespace fcoh
