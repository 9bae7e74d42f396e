#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bloomgate/error.hpp"
#include "bloomgate/lexical.hpp"
#include "bloomgate/resources.hpp"
#include "bloomgate/text.hpp"

namespace bloomgate::semantic {

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    double s = 0.0;
    for (double v : values_) s += v * v;
    norm_ = std::sqrt(s);
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t dimension() const { return values_.size(); }
  double norm() const { return norm_; }

  bool operator==(const EmbeddingVector& o) const { return values_ == o.values_; }

 private:
  std::vector<double> values_;
  double norm_ = 0.0;
};

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dimensions " + std::to_string(a.dimension()) + " and " + std::to_string(b.dimension()));
  }
  if (a.norm() == 0.0 || b.norm() == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) dot += a.values()[i] * b.values()[i];
  return std::clamp(dot / (a.norm() * b.norm()), -1.0, 1.0);
}

/// Negative similarity counts as fully original.
inline double semantic_subscore_for(double max_similarity) {
  return std::clamp(100.0 * std::max(0.0, max_similarity), 0.0, 100.0);
}

/// Embedding provider contract: a batch of texts in, one vector per text
/// out, all of one dimension. Implementations throw ProviderUnavailable.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

/// Deterministic offline embedder: term-frequency counts of lowercase
/// alphanumeric words, feature-hashed (FNV-1a) into a fixed dimension.
class TermFrequencyEmbedder final : public EmbeddingProvider {
 public:
  explicit TermFrequencyEmbedder(std::size_t dimension = 4096) : dimension_(dimension) {}

  std::string id() const override { return "mock-tf-" + std::to_string(dimension_); }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return h;
  }

  EmbeddingVector embed_one(std::string_view text) const {
    std::vector<double> v(dimension_, 0.0);
    for (const auto& w : lexical::raw_words(text)) v[fnv1a(w) % dimension_] += 1.0;
    return EmbeddingVector(std::move(v));
  }

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
  }

 private:
  std::size_t dimension_;
};

/// Memoizes provider output by (provider id, SHA-256 of the text).
/// Concurrent writers of the same key store identical values.
class EmbeddingCache {
 public:
  std::vector<EmbeddingVector> embed(EmbeddingProvider& provider, const std::vector<std::string>& texts) {
    const std::string pid = provider.id();
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::string> missing;
    std::vector<std::size_t> missing_at;
    {
      std::shared_lock lock(mu_);
      for (std::size_t i = 0; i < texts.size(); ++i) {
        auto it = entries_.find(key(pid, texts[i]));
        if (it != entries_.end()) {
          out[i] = it->second;
        } else {
          missing.push_back(texts[i]);
          missing_at.push_back(i);
        }
      }
    }
    if (missing.empty()) return out;
    auto fresh = provider.embed(missing);
    if (fresh.size() != missing.size()) {
      throw Error(ErrorCode::ProviderUnavailable, "embedding provider returned a wrong vector count");
    }
    std::unique_lock lock(mu_);
    for (std::size_t j = 0; j < fresh.size(); ++j) {
      entries_[key(pid, missing[j])] = fresh[j];
      out[missing_at[j]] = std::move(fresh[j]);
    }
    return out;
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
  }

 private:
  static std::string key(const std::string& pid, const std::string& t) { return pid + "\n" + text::sha256_hex(t); }

  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, EmbeddingVector> entries_;
};

struct BankPrompt {
  std::string text;
  EmbeddingVector vector;
};

/// Reference prompts whose close paraphrases are easy for a model to answer.
class BoilerplateBank {
 public:
  /// `json_list` is a JSON array of prompt strings.
  static std::vector<std::string> parse_prompts(std::string_view json_list) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_list);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedInput, std::string("boilerplate bank: ") + e.what());
    }
    if (!j.is_array() || j.empty()) throw Error(ErrorCode::MalformedInput, "boilerplate bank must be a non-empty list");
    std::vector<std::string> prompts;
    for (const auto& e : j) {
      if (!e.is_string() || text::trim(e.get<std::string>()).empty()) {
        throw Error(ErrorCode::MalformedInput, "boilerplate bank entries must be non-empty strings");
      }
      prompts.push_back(e.get<std::string>());
    }
    return prompts;
  }

  static BoilerplateBank build(const std::vector<std::string>& prompts, EmbeddingProvider& provider,
                               EmbeddingCache* cache = nullptr, std::string version = {}) {
    if (prompts.empty()) throw Error(ErrorCode::MalformedInput, "boilerplate bank is empty");
    auto vecs = cache ? cache->embed(provider, prompts) : provider.embed(prompts);
    BoilerplateBank bank;
    bank.dimension_ = vecs.at(0).dimension();
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      if (vecs[i].dimension() != bank.dimension_) {
        throw Error(ErrorCode::DimensionMismatch, "bank vectors disagree on dimension");
      }
      bank.prompts_.push_back({prompts[i], std::move(vecs[i])});
    }
    if (version.empty()) {
      version = "bank-" + text::sha256_hex(text::join(prompts, "\n")).substr(0, 12);
    }
    bank.version_ = std::move(version);
    return bank;
  }

  static std::vector<std::string> shipped_prompts() { return parse_prompts(resources::kBoilerplateBank); }

  const std::vector<BankPrompt>& prompts() const { return prompts_; }
  std::size_t dimension() const { return dimension_; }
  const std::string& version() const { return version_; }

 private:
  std::vector<BankPrompt> prompts_;
  std::size_t dimension_ = 0;
  std::string version_;
};

struct SemanticFeatures {
  double max_boilerplate_similarity = -1.0;
  std::string nearest_prompt;
  double semantic_subscore = 0.0;
};

/// Max cosine similarity against the bank; ties keep the earlier prompt.
inline SemanticFeatures semantic_features(std::string_view question_text, const BoilerplateBank& bank,
                                          EmbeddingProvider& provider, EmbeddingCache* cache = nullptr) {
  if (text::trim(question_text).empty()) throw Error(ErrorCode::EmptyQuestion, "question text is empty");
  std::vector<std::string> batch{std::string(question_text)};
  auto vecs = cache ? cache->embed(provider, batch) : provider.embed(batch);
  if (vecs.size() != 1) throw Error(ErrorCode::ProviderUnavailable, "embedding provider returned no vector");
  const auto& q = vecs.front();
  if (q.dimension() != bank.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "question vector dimension " + std::to_string(q.dimension()) +
                                                  " vs bank " + std::to_string(bank.dimension()));
  }
  SemanticFeatures f;
  if (q.norm() == 0.0) {
    // Nothing embeddable (e.g. pure punctuation): maximally original.
    f.max_boilerplate_similarity = 0.0;
    f.semantic_subscore = 0.0;
    return f;
  }
  bool first = true;
  for (const auto& p : bank.prompts()) {
    if (p.vector.norm() == 0.0) continue;
    double s = cosine(q, p.vector);
    if (first || s > f.max_boilerplate_similarity) {
      f.max_boilerplate_similarity = s;
      f.nearest_prompt = p.text;
      first = false;
    }
  }
  f.semantic_subscore = semantic_subscore_for(f.max_boilerplate_similarity);
  return f;
}

}  // namespace bloomgate::semantic
