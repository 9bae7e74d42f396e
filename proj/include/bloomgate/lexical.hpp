#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bloomgate/error.hpp"
#include "bloomgate/resources.hpp"
#include "bloomgate/text.hpp"

namespace bloomgate::lexical {

class StopList {
 public:
  StopList() = default;
  explicit StopList(std::set<std::string> words) : words_(std::move(words)) {}

  /// One word per line; blank lines and '#' comments ignored.
  static StopList parse(std::string_view content) {
    std::set<std::string> words;
    for (auto line : text::split_lines(content)) {
      auto w = text::trim(line);
      if (w.empty() || w.front() == '#') continue;
      words.insert(text::lowercase(w));
    }
    return StopList(std::move(words));
  }

  static const StopList& shipped() {
    static const StopList list = parse(resources::kStopWords);
    return list;
  }

  bool contains(const std::string& w) const { return words_.count(w) != 0; }
  std::size_t size() const { return words_.size(); }

 private:
  std::set<std::string> words_;
};

/// Lowercase alphanumeric runs, without the length/stop filter.
inline std::vector<std::string> raw_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (text::is_alnum(c)) {
      cur.push_back(text::to_lower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Lowercase, split on non-alphanumerics, drop tokens shorter than two
/// characters and stop words.
inline std::vector<std::string> tokenize(std::string_view s, const StopList& stop = StopList::shipped()) {
  std::vector<std::string> out;
  for (auto& w : raw_words(s)) {
    if (w.size() < 2 || stop.contains(w)) continue;
    out.push_back(std::move(w));
  }
  return out;
}

class TfIdfModel {
 public:
  std::size_t n_docs() const { return n_docs_; }
  const std::map<std::string, std::size_t>& vocabulary() const { return vocabulary_; }
  const std::map<std::string, std::size_t>& doc_freq() const { return doc_freq_; }
  const std::map<std::string, double>& idf() const { return idf_; }
  const StopList& stop_list() const { return stop_; }

  /// Smoothed idf; out-of-vocabulary terms get the maximal-rarity value.
  double idf_of(const std::string& term) const {
    auto it = idf_.find(term);
    return it != idf_.end() ? it->second : oov_idf();
  }
  double oov_idf() const { return std::log(1.0 + static_cast<double>(n_docs_)) + 1.0; }

  /// tf·idf per distinct term of `s`, tf = count / token count.
  std::map<std::string, double> tfidf(std::string_view s) const {
    auto toks = tokenize(s, stop_);
    std::map<std::string, std::size_t> counts;
    for (const auto& t : toks) ++counts[t];
    std::map<std::string, double> out;
    for (const auto& [term, c] : counts) {
      out[term] = (static_cast<double>(c) / static_cast<double>(toks.size())) * idf_of(term);
    }
    return out;
  }

  friend TfIdfModel fit_corpus(const std::vector<std::string>& documents, const StopList& stop);

 private:
  std::size_t n_docs_ = 0;
  std::map<std::string, std::size_t> vocabulary_;
  std::map<std::string, std::size_t> doc_freq_;
  std::map<std::string, double> idf_;
  StopList stop_;
};

inline TfIdfModel fit_corpus(const std::vector<std::string>& documents,
                             const StopList& stop = StopList::shipped()) {
  TfIdfModel m;
  m.stop_ = stop;
  for (const auto& doc : documents) {
    if (text::trim(doc).empty()) continue;
    ++m.n_docs_;
    auto toks = tokenize(doc, stop);
    std::set<std::string> seen(toks.begin(), toks.end());
    for (const auto& t : seen) ++m.doc_freq_[t];
  }
  if (m.n_docs_ == 0) throw Error(ErrorCode::EmptyCorpus, "corpus has no non-empty documents");
  std::size_t col = 0;
  const double n = static_cast<double>(m.n_docs_);
  for (const auto& [term, df] : m.doc_freq_) {
    m.vocabulary_[term] = col++;
    m.idf_[term] = std::log((1.0 + n) / (1.0 + static_cast<double>(df))) + 1.0;
  }
  return m;
}

/// The shipped seed corpus, one question per line.
inline std::vector<std::string> seed_corpus() {
  std::vector<std::string> docs;
  for (auto line : text::split_lines(resources::kSeedCorpus)) {
    auto t = text::trim(line);
    if (!t.empty()) docs.emplace_back(t);
  }
  return docs;
}

struct ComplexityFeatures {
  double mean_tfidf = 0.0;
  double distinct_term_ratio = 0.0;
  double mean_word_length = 0.0;
  double lexical_subscore = 100.0;
};

inline constexpr double kDefaultRaritySaturation = 0.5;

/// 100 at zero rarity, falling linearly to 0 at `tau`.
inline double lexical_subscore_for(double mean_tfidf, double tau = kDefaultRaritySaturation) {
  double s = 100.0 * (1.0 - std::min(1.0, mean_tfidf / tau));
  return std::clamp(s, 0.0, 100.0);
}

/// mean_tfidf averages tf·idf over the question's distinct terms.
inline ComplexityFeatures complexity(std::string_view question_text, const TfIdfModel& model,
                                     double tau = kDefaultRaritySaturation) {
  auto words = raw_words(question_text);
  if (words.empty()) throw Error(ErrorCode::EmptyQuestion, "question has no words");
  ComplexityFeatures f;
  std::size_t chars = 0;
  for (const auto& w : words) chars += w.size();
  f.mean_word_length = static_cast<double>(chars) / static_cast<double>(words.size());

  auto toks = tokenize(question_text, model.stop_list());
  auto vec = model.tfidf(question_text);
  if (!toks.empty()) {
    double sum = 0.0;
    for (const auto& [term, v] : vec) sum += v;
    f.mean_tfidf = sum / static_cast<double>(vec.size());
    f.distinct_term_ratio = static_cast<double>(vec.size()) / static_cast<double>(toks.size());
  }
  f.lexical_subscore = lexical_subscore_for(f.mean_tfidf, tau);
  return f;
}

}  // namespace bloomgate::lexical
