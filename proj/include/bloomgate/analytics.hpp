#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bloomgate/error.hpp"
#include "bloomgate/fusion.hpp"

namespace bloomgate::analytics {

struct BandHistogram {
  std::array<std::size_t, 4> counts{};  // indexed by fusion::Band
  std::size_t total = 0;

  std::size_t count(fusion::Band b) const { return counts[static_cast<std::size_t>(b)]; }
  void add(fusion::Band b) {
    ++counts[static_cast<std::size_t>(b)];
    ++total;
  }
  bool operator==(const BandHistogram&) const = default;
};

inline BandHistogram histogram(const std::vector<double>& assignment_scores, const fusion::BandThresholds& t = {}) {
  BandHistogram h;
  for (double s : assignment_scores) h.add(fusion::band(s, t));
  return h;
}

/// `{"counts": {"Low": n, ...}, "total": n}`
inline nlohmann::json to_json(const BandHistogram& h) {
  nlohmann::json counts = nlohmann::json::object();
  for (auto b : fusion::kAllBands) counts[std::string(fusion::to_string(b))] = h.count(b);
  return {{"counts", counts}, {"total", h.total}};
}

/// `band,count` header then one row per band, Low to High.
inline std::string to_csv(const BandHistogram& h) {
  std::ostringstream out;
  out << "band,count\n";
  for (auto b : fusion::kAllBands) out << fusion::to_string(b) << ',' << h.count(b) << '\n';
  return out.str();
}

struct TaskRow {
  std::size_t index = 0;
  double score = 0.0;
  double mean_tfidf = 0.0;
  double semantic_subscore = 0.0;
};

/// Strict weak ordering: score desc, semantic desc, mean_tfidf asc, index asc.
inline bool ranks_before(const TaskRow& a, const TaskRow& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.semantic_subscore != b.semantic_subscore) return a.semantic_subscore > b.semantic_subscore;
  if (a.mean_tfidf != b.mean_tfidf) return a.mean_tfidf < b.mean_tfidf;
  return a.index < b.index;
}

/// Tasks ordered from most to least AI-susceptible; returns the rows' indices.
inline std::vector<std::size_t> rank_tasks(std::vector<TaskRow> rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyList, "no tasks to rank");
  std::stable_sort(rows.begin(), rows.end(), ranks_before);
  std::vector<std::size_t> order;
  order.reserve(rows.size());
  for (const auto& r : rows) order.push_back(r.index);
  return order;
}

}  // namespace bloomgate::analytics
