#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bloomgate/error.hpp"
#include "bloomgate/resources.hpp"
#include "bloomgate/text.hpp"

namespace bloomgate::bloom {

enum class Level { Remember = 1, Understand = 2, Apply = 3, Analyze = 4, Evaluate = 5, Create = 6 };

inline constexpr std::size_t kLevelCount = 6;
inline constexpr std::array<Level, kLevelCount> kAllLevels = {
    Level::Remember, Level::Understand, Level::Apply, Level::Analyze, Level::Evaluate, Level::Create};

constexpr std::size_t slot(Level l) { return static_cast<std::size_t>(l) - 1; }
constexpr Level level_at(std::size_t slot) { return static_cast<Level>(slot + 1); }

constexpr std::string_view to_string(Level l) {
  switch (l) {
    case Level::Remember: return "Remember";
    case Level::Understand: return "Understand";
    case Level::Apply: return "Apply";
    case Level::Analyze: return "Analyze";
    case Level::Evaluate: return "Evaluate";
    case Level::Create: return "Create";
  }
  return "Understand";
}

inline std::optional<Level> level_from_string(std::string_view s) {
  for (auto l : kAllLevels) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

using LevelWeights = std::array<double, kLevelCount>;

struct LexiconEntry {
  Level level = Level::Understand;
  double weight = 1.0;
};

/// Term -> (level, weight). Terms are lowercase words or two-word phrases.
class VerbLexicon {
 public:
  VerbLexicon() = default;
  VerbLexicon(std::map<std::string, LexiconEntry> entries, std::string version)
      : entries_(std::move(entries)), version_(std::move(version)) {}

  /// Parses the tab-separated lexicon format. Any violation throws
  /// InvalidLexicon naming the 1-based line.
  static VerbLexicon parse(std::string_view content, std::string_view fallback_version = {}) {
    std::map<std::string, LexiconEntry> entries;
    std::map<std::string, std::size_t> first_line;
    std::string version;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::InvalidLexicon, "line " + std::to_string(line_no) + ": " + why);
    };
    if (!text::is_valid_utf8(content)) throw Error(ErrorCode::InvalidLexicon, "lexicon is not valid UTF-8");
    for (auto raw_line : text::split_lines(content)) {
      ++line_no;
      std::string_view line = raw_line;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      auto trimmed = text::trim(line);
      if (trimmed.empty()) continue;
      if (trimmed.front() == '#') {
        auto body = text::trim(trimmed.substr(1));
        if (body.rfind("version:", 0) == 0) version = std::string(text::trim(body.substr(8)));
        continue;
      }
      std::vector<std::string_view> cols;
      std::size_t pos = 0;
      while (true) {
        auto tab = line.find('\t', pos);
        cols.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
        if (tab == std::string_view::npos) break;
        pos = tab + 1;
      }
      if (cols.size() < 2 || cols.size() > 3) fail("expected term<TAB>level[<TAB>weight]");
      std::string term = text::collapse_whitespace(text::lowercase(cols[0]));
      if (term.empty()) fail("empty term");
      if (std::count(term.begin(), term.end(), ' ') > 1) fail("phrases are limited to two words: '" + term + "'");
      auto level = level_from_string(text::trim(cols[1]));
      if (!level) fail("unknown level '" + std::string(text::trim(cols[1])) + "'");
      double weight = 1.0;
      if (cols.size() == 3) {
        auto w = text::trim(cols[2]);
        auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), weight);
        if (ec != std::errc() || ptr != w.data() + w.size()) fail("bad weight '" + std::string(w) + "'");
        if (!(weight > 0.0) || !std::isfinite(weight)) fail("weight must be positive");
      }
      if (auto it = first_line.find(term); it != first_line.end()) {
        fail("duplicate term '" + term + "' (first defined on line " + std::to_string(it->second) + ")");
      }
      first_line.emplace(term, line_no);
      entries.emplace(std::move(term), LexiconEntry{*level, weight});
    }
    if (entries.empty()) throw Error(ErrorCode::InvalidLexicon, "lexicon has no entries");
    if (version.empty()) {
      version = fallback_version.empty() ? "lexicon-" + text::sha256_hex(content).substr(0, 12)
                                         : std::string(fallback_version);
    }
    return VerbLexicon(std::move(entries), std::move(version));
  }

  static const VerbLexicon& shipped() {
    static const VerbLexicon lexicon = parse(resources::kDefaultLexicon);
    return lexicon;
  }

  const LexiconEntry* find(std::string_view term) const {
    auto it = entries_.find(std::string(term));
    return it == entries_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, LexiconEntry>& entries() const { return entries_; }
  const std::string& version() const { return version_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, LexiconEntry> entries_;
  std::string version_;
};

struct MatchedTerm {
  std::string term;
  Level level;
  bool operator==(const MatchedTerm&) const = default;
};

struct BloomProfile {
  LevelWeights weights{};
  Level dominant = Level::Understand;
  std::vector<MatchedTerm> matched_terms;
  bool low_confidence = false;  // no lexicon hit

  bool operator==(const BloomProfile&) const = default;
};

/// Crude suffix stripper: -ing, -ed, -es, -s, undoing a doubled final
/// consonant ("planned" -> "plan").
inline std::string stem(std::string_view word) {
  std::string w(word);
  auto undouble = [](std::string& s) {
    auto n = s.size();
    if (n >= 3 && s[n - 1] == s[n - 2] && text::is_alpha(s[n - 1]) &&
        std::string_view("aeiouylsz").find(s[n - 1]) == std::string_view::npos) {
      s.pop_back();
    }
  };
  auto ends = [&](std::string_view suf) {
    return w.size() > suf.size() && std::string_view(w).substr(w.size() - suf.size()) == suf;
  };
  if (ends("ing") && w.size() > 5) {
    w.resize(w.size() - 3);
    undouble(w);
  } else if (ends("ed") && w.size() > 4) {
    w.resize(w.size() - 2);
    undouble(w);
  } else if (ends("es") && w.size() > 4) {
    w.resize(w.size() - 2);
  } else if (ends("s") && !ends("ss") && w.size() > 3) {
    w.pop_back();
  }
  return w;
}

/// Lowercase alphabetic word tokens.
inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (text::is_alpha(c)) {
      cur.push_back(text::to_lower(c));
    } else if (c == '\'') {
      // "don't" -> "dont"
      continue;
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace detail {

/// Candidate lexicon keys for a token: the surface form, its stem, and the
/// stem with a restored silent 'e' ("compared" -> "compar" -> "compare").
inline std::vector<std::string> candidates(const std::string& token) {
  std::vector<std::string> c{token};
  auto s = stem(token);
  if (s != token) {
    c.push_back(s);
    c.push_back(s + "e");
  }
  return c;
}

inline const LexiconEntry* lookup_phrase(const VerbLexicon& lex, const std::string& a, const std::string& b,
                                         std::string& matched) {
  for (const auto& ca : candidates(a)) {
    for (const auto& cb : candidates(b)) {
      auto key = ca + " " + cb;
      if (const auto* e = lex.find(key)) {
        matched = key;
        return e;
      }
    }
  }
  return nullptr;
}

inline const LexiconEntry* lookup_word(const VerbLexicon& lex, const std::string& w, std::string& matched) {
  for (const auto& c : candidates(w)) {
    if (const auto* e = lex.find(c)) {
      matched = c;
      return e;
    }
  }
  return nullptr;
}

}  // namespace detail

/// Picks the level with maximal weight; ties go to the higher level.
inline Level dominant_of(const LevelWeights& w) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kLevelCount; ++i) {
    if (w[i] >= w[best]) best = i;
  }
  return level_at(best);
}

/// Scores a question against the lexicon. Two-word phrases take precedence
/// over their constituent words at the same position.
inline BloomProfile classify(std::string_view question_text, const VerbLexicon& lexicon = VerbLexicon::shipped()) {
  if (text::trim(question_text).empty()) throw Error(ErrorCode::EmptyQuestion, "question text is empty");
  auto toks = words(question_text);
  BloomProfile p;
  LevelWeights raw{};
  for (std::size_t i = 0; i < toks.size();) {
    std::string matched;
    if (i + 1 < toks.size()) {
      if (const auto* e = detail::lookup_phrase(lexicon, toks[i], toks[i + 1], matched)) {
        raw[slot(e->level)] += e->weight;
        p.matched_terms.push_back({matched, e->level});
        i += 2;
        continue;
      }
    }
    if (const auto* e = detail::lookup_word(lexicon, toks[i], matched)) {
      raw[slot(e->level)] += e->weight;
      p.matched_terms.push_back({matched, e->level});
    }
    ++i;
  }
  double total = 0.0;
  for (double v : raw) total += v;
  if (p.matched_terms.empty() || total <= 0.0) {
    p.weights = {};
    p.dominant = Level::Understand;
    p.low_confidence = true;
    return p;
  }
  for (std::size_t i = 0; i < kLevelCount; ++i) p.weights[i] = raw[i] / total;
  p.dominant = dominant_of(raw);
  return p;
}

/// Per-level solvability in percent; must be strictly decreasing in level.
struct SolvabilityTable {
  LevelWeights values{90.0, 80.0, 65.0, 50.0, 40.0, 30.0};

  bool strictly_decreasing() const {
    for (std::size_t i = 1; i < kLevelCount; ++i) {
      if (!(values[i] < values[i - 1])) return false;
    }
    return true;
  }
  bool operator==(const SolvabilityTable&) const = default;
};

/// Dot product of the profile with the table. A no-hit profile scores at
/// its fallback dominant level.
inline double bloom_subscore(const BloomProfile& profile, const SolvabilityTable& table = {}) {
  if (profile.low_confidence) return table.values[slot(profile.dominant)];
  double s = 0.0;
  for (std::size_t i = 0; i < kLevelCount; ++i) s += profile.weights[i] * table.values[i];
  return s;
}

}  // namespace bloomgate::bloom
