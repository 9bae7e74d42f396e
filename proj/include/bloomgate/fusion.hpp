#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bloomgate/error.hpp"

namespace bloomgate::fusion {

enum class Signal { Judge = 0, Bloom = 1, Semantic = 2, Lexical = 3 };
inline constexpr std::size_t kSignalCount = 4;

constexpr std::string_view to_string(Signal s) {
  switch (s) {
    case Signal::Judge: return "judge";
    case Signal::Bloom: return "bloom";
    case Signal::Semantic: return "semantic";
    case Signal::Lexical: return "lexical";
  }
  return "judge";
}

struct FusionWeights {
  double judge = 0.50;
  double bloom = 0.20;
  double semantic = 0.20;
  double lexical = 0.10;

  std::array<double, kSignalCount> as_array() const { return {judge, bloom, semantic, lexical}; }
  static FusionWeights from_array(const std::array<double, kSignalCount>& a) { return {a[0], a[1], a[2], a[3]}; }

  double sum() const { return judge + bloom + semantic + lexical; }

  void validate() const {
    for (double w : as_array()) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidConfig, "fusion weights must be non-negative");
    }
    if (std::abs(sum() - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidConfig, "fusion weights must sum to 1 (got " + std::to_string(sum()) + ")");
    }
  }
  bool operator==(const FusionWeights&) const = default;
};

/// Subscores in [0,100]; nullopt marks a signal as unavailable.
struct Subscores {
  std::optional<double> judge;
  std::optional<double> bloom;
  std::optional<double> semantic;
  std::optional<double> lexical;

  std::array<std::optional<double>, kSignalCount> as_array() const { return {judge, bloom, semantic, lexical}; }
  bool operator==(const Subscores&) const = default;
};

struct SolvabilityScore {
  double value = 0.0;
  Subscores subscores;
  FusionWeights weights_used;
};

/// Convex combination of the available subscores; the weight of each
/// missing signal is redistributed pro rata over the available ones.
inline SolvabilityScore fuse(const Subscores& subscores, const FusionWeights& weights = {}) {
  weights.validate();
  auto vals = subscores.as_array();
  auto w = weights.as_array();
  double available_mass = 0.0;
  std::size_t available = 0;
  for (std::size_t i = 0; i < kSignalCount; ++i) {
    if (!vals[i]) continue;
    if (!(*vals[i] >= 0.0 && *vals[i] <= 100.0)) {
      throw Error(ErrorCode::OutOfRange, std::string(to_string(static_cast<Signal>(i))) +
                                             " subscore outside [0,100]: " + std::to_string(*vals[i]));
    }
    ++available;
    available_mass += w[i];
  }
  if (available == 0) throw Error(ErrorCode::NoSignals, "no subscore available");

  std::array<double, kSignalCount> used{};
  for (std::size_t i = 0; i < kSignalCount; ++i) {
    if (!vals[i]) continue;
    if (available == kSignalCount) {
      used[i] = w[i];
    } else if (available_mass > 0.0) {
      used[i] = w[i] / available_mass;
    } else {
      // Every available signal carries zero weight: fall back to uniform.
      used[i] = 1.0 / static_cast<double>(available);
    }
  }
  double value = 0.0;
  for (std::size_t i = 0; i < kSignalCount; ++i) {
    if (vals[i]) value += used[i] * *vals[i];
  }
  return {std::clamp(value, 0.0, 100.0), subscores, FusionWeights::from_array(used)};
}

enum class Band { Low = 0, Medium = 1, MediumHigh = 2, High = 3 };
inline constexpr std::array<Band, 4> kAllBands = {Band::Low, Band::Medium, Band::MediumHigh, Band::High};

/// Labels match the ease-prediction table verbatim.
constexpr std::string_view to_string(Band b) {
  switch (b) {
    case Band::Low: return "Low";
    case Band::Medium: return "Medium";
    case Band::MediumHigh: return "Medium-High";
    case Band::High: return "High";
  }
  return "Low";
}

inline std::optional<Band> band_from_string(std::string_view s) {
  for (auto b : kAllBands) {
    if (to_string(b) == s) return b;
  }
  return std::nullopt;
}

/// Lower edges of Medium, Medium-High and High. Intervals are half-open:
/// Low=[0,medium) Medium=[medium,medium_high) MediumHigh=[medium_high,high) High=[high,100].
struct BandThresholds {
  double medium = 50.0;
  double medium_high = 65.0;
  double high = 75.0;

  bool is_default() const { return *this == BandThresholds{}; }
  void validate() const {
    if (!(0.0 < medium && medium < medium_high && medium_high < high && high <= 100.0)) {
      throw Error(ErrorCode::InvalidConfig, "band thresholds must satisfy 0 < medium < medium_high < high <= 100");
    }
  }
  bool operator==(const BandThresholds&) const = default;
};

inline Band band(double score, const BandThresholds& t = {}) {
  if (!(score >= 0.0 && score <= 100.0)) {
    throw Error(ErrorCode::OutOfRange, "score outside [0,100]: " + std::to_string(score));
  }
  if (score >= t.high) return Band::High;
  if (score >= t.medium_high) return Band::MediumHigh;
  if (score >= t.medium) return Band::Medium;
  return Band::Low;
}

struct AssignmentAggregate {
  double score = 0.0;
  Band band = Band::Low;
};

/// Mean of the question scores, banded. Summation runs in sorted order so
/// the result is bit-identical under any permutation of the input.
inline AssignmentAggregate aggregate_assignment(std::span<const double> question_scores, const BandThresholds& t = {}) {
  if (question_scores.empty()) throw Error(ErrorCode::EmptyList, "no question scores to aggregate");
  std::vector<double> sorted(question_scores.begin(), question_scores.end());
  std::sort(sorted.begin(), sorted.end());
  double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  mean = std::clamp(mean, 0.0, 100.0);
  return {mean, band(mean, t)};
}

inline AssignmentAggregate aggregate_assignment(const std::vector<SolvabilityScore>& question_scores,
                                                const BandThresholds& t = {}) {
  std::vector<double> values;
  values.reserve(question_scores.size());
  for (const auto& s : question_scores) values.push_back(s.value);
  return aggregate_assignment(std::span<const double>(values), t);
}

}  // namespace bloomgate::fusion
