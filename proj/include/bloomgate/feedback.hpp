#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bloomgate/bloom.hpp"
#include "bloomgate/error.hpp"
#include "bloomgate/fusion.hpp"
#include "bloomgate/ingest.hpp"

namespace bloomgate::feedback {

using nlohmann::json;

enum class RecommendationKind {
  RaiseBloomLevel,
  AddContextualScenario,
  RequireJustification,
  AddMultiStepReasoning,
  ReplaceDefinitional,
};

constexpr std::string_view to_string(RecommendationKind k) {
  switch (k) {
    case RecommendationKind::RaiseBloomLevel: return "RaiseBloomLevel";
    case RecommendationKind::AddContextualScenario: return "AddContextualScenario";
    case RecommendationKind::RequireJustification: return "RequireJustification";
    case RecommendationKind::AddMultiStepReasoning: return "AddMultiStepReasoning";
    case RecommendationKind::ReplaceDefinitional: return "ReplaceDefinitional";
  }
  return "RaiseBloomLevel";
}

inline RecommendationKind recommendation_kind_from_string(std::string_view s) {
  for (auto k : {RecommendationKind::RaiseBloomLevel, RecommendationKind::AddContextualScenario,
                 RecommendationKind::RequireJustification, RecommendationKind::AddMultiStepReasoning,
                 RecommendationKind::ReplaceDefinitional}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::MalformedInput, "unknown recommendation kind '" + std::string(s) + "'");
}

struct Recommendation {
  std::size_t question_index = 0;
  RecommendationKind kind = RecommendationKind::RaiseBloomLevel;
  std::string text;
  std::string trigger;
  bool operator==(const Recommendation&) const = default;
};

// Question-level flags.
inline constexpr std::string_view kFlagJudgeUnavailable = "judge-unavailable";
inline constexpr std::string_view kFlagSemanticUnavailable = "semantic-unavailable";
inline constexpr std::string_view kFlagLexicalUnavailable = "lexical-unavailable";
inline constexpr std::string_view kFlagBloomLowConfidence = "bloom-low-confidence";

/// One analyzed question as it appears in the report.
struct QuestionRow {
  std::size_t index = 0;
  std::string text;
  std::optional<std::string> marker;
  CharSpan char_span;
  bloom::LevelWeights bloom_weights{};
  bloom::Level dominant = bloom::Level::Understand;
  std::vector<bloom::MatchedTerm> matched_terms;
  bool bloom_low_confidence = false;
  fusion::Subscores subscores;
  fusion::FusionWeights weights_used;
  double score = 0.0;
  fusion::Band band = fusion::Band::Low;
  std::optional<double> mean_tfidf;
  std::optional<double> max_boilerplate_similarity;
  std::optional<std::string> nearest_prompt;
  std::optional<std::string> judge_rationale;
  std::vector<std::string> flags;

  bool has_flag(std::string_view f) const {
    for (const auto& x : flags) {
      if (x == f) return true;
    }
    return false;
  }
  bool operator==(const QuestionRow&) const = default;
};

struct AnalysisReport {
  std::string id;
  std::string title;
  SourceFormat source_format = SourceFormat::PlainText;
  std::string created_at;
  std::string ingested_at;
  std::string tool_version;
  std::string config_hash;
  std::vector<QuestionRow> questions;
  double assignment_score = 0.0;
  fusion::Band assignment_band = fusion::Band::Low;
  std::optional<double> holistic_judge;
  std::vector<std::string> strengths;
  std::vector<std::string> weaknesses;
  std::vector<Recommendation> recommendations;
  std::vector<std::size_t> ranking;
  std::vector<std::string> flags;
  std::vector<std::string> notices;

  bool operator==(const AnalysisReport&) const = default;
};

inline std::string format_utc(std::chrono::system_clock::time_point tp) {
  std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Parses "YYYY-MM-DDTHH:MM:SSZ".
inline std::chrono::system_clock::time_point parse_utc(std::string_view s) {
  std::tm tm{};
  std::istringstream in{std::string(s)};
  in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  if (in.fail()) throw Error(ErrorCode::InvalidArgument, "bad UTC timestamp '" + std::string(s) + "'");
  return std::chrono::system_clock::from_time_t(timegm(&tm));
}

// Rule table. Texts are fixed so reports compare byte-for-byte.
inline constexpr std::string_view kW1Text = "definitional/low-complexity task";
inline constexpr std::string_view kW3Text = "close paraphrase of boilerplate prompt";
inline constexpr std::string_view kS1Text = "resistant to AI completion";
inline constexpr std::string_view kS2Text = "targets higher-order thinking";
inline constexpr std::string_view kN1Strength = "balanced cognitive profile";
inline constexpr std::string_view kN1Weakness = "no dominant risk identified";
inline constexpr double kBoilerplateThreshold = 80.0;

enum class Rule { W1, W2, W3, S1, S2 };

constexpr std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::W1: return "W1";
    case Rule::W2: return "W2";
    case Rule::W3: return "W3";
    case Rule::S1: return "S1";
    case Rule::S2: return "S2";
  }
  return "W1";
}

inline std::optional<Rule> rule_from_string(std::string_view s) {
  for (auto r : {Rule::W1, Rule::W2, Rule::W3, Rule::S1, Rule::S2}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

/// Predicate behind each rule, evaluated on a stored row.
inline bool rule_fires(Rule rule, const QuestionRow& row) {
  using bloom::Level;
  switch (rule) {
    case Rule::W1: return row.band == fusion::Band::High;
    case Rule::W2: return row.dominant == Level::Remember || row.dominant == Level::Understand;
    case Rule::W3: return row.subscores.semantic && *row.subscores.semantic > kBoilerplateThreshold;
    case Rule::S1: return row.band == fusion::Band::Low;
    case Rule::S2: return row.dominant == Level::Evaluate || row.dominant == Level::Create;
  }
  return false;
}

namespace detail {

inline std::string qlabel(std::size_t index) { return "Question " + std::to_string(index + 1); }

inline std::string recommendation_text(RecommendationKind kind, const QuestionRow& row) {
  const auto q = qlabel(row.index);
  switch (kind) {
    case RecommendationKind::ReplaceDefinitional:
      return q + ": replace the definitional prompt with a task that applies the concept to a specific, "
                 "local scenario students must reason about.";
    case RecommendationKind::RaiseBloomLevel:
      return q + ": raise the cognitive demand above " + std::string(bloom::to_string(row.dominant)) +
             " by asking students to analyze, evaluate or design rather than recall or restate.";
    case RecommendationKind::AddContextualScenario:
      return q + ": anchor the task in a concrete case (course data, a named organisation or user scenario) "
                 "so a generic answer no longer fits.";
    case RecommendationKind::RequireJustification:
      return q + ": require students to justify each decision with evidence from their own work.";
    case RecommendationKind::AddMultiStepReasoning:
      return q + ": split the task into dependent steps where each step builds on the previous result.";
  }
  return q;
}

}  // namespace detail

struct ReportContext {
  std::string created_at;
  std::string tool_version;
  std::string config_hash;
  fusion::BandThresholds thresholds;
  std::optional<double> holistic_judge;
  std::vector<std::size_t> ranking;
  std::vector<std::string> notices;
};

/// Applies the rule table to every row and assembles the report.
inline AnalysisReport generate_report(std::vector<QuestionRow> rows, const AssessmentDocument& doc,
                                      const ReportContext& ctx) {
  if (rows.empty()) throw Error(ErrorCode::EmptyAnalysis, "no analyzed questions");
  AnalysisReport r;
  r.id = doc.id;
  r.title = doc.title;
  r.source_format = doc.source_format;
  r.created_at = ctx.created_at;
  r.ingested_at = format_utc(doc.ingested_at);
  r.tool_version = ctx.tool_version;
  r.config_hash = ctx.config_hash;
  r.holistic_judge = ctx.holistic_judge;
  r.ranking = ctx.ranking;
  r.notices = ctx.notices;

  std::vector<double> scores;
  for (const auto& row : rows) {
    scores.push_back(row.score);
    const auto q = detail::qlabel(row.index);
    auto recommend = [&](RecommendationKind kind, Rule rule) {
      r.recommendations.push_back(
          {row.index, kind, detail::recommendation_text(kind, row), std::string(to_string(rule))});
    };
    if (rule_fires(Rule::W1, row)) {
      r.weaknesses.push_back(q + ": " + std::string(kW1Text));
      recommend(RecommendationKind::ReplaceDefinitional, Rule::W1);
    }
    if (rule_fires(Rule::W2, row)) {
      recommend(RecommendationKind::RaiseBloomLevel, Rule::W2);
    }
    if (rule_fires(Rule::W3, row)) {
      r.weaknesses.push_back(q + ": " + std::string(kW3Text));
      recommend(RecommendationKind::AddContextualScenario, Rule::W3);
    }
    if (rule_fires(Rule::S1, row)) {
      r.strengths.push_back(q + ": " + std::string(kS1Text));
    }
    if (rule_fires(Rule::S2, row)) {
      r.strengths.push_back(q + ": " + std::string(kS2Text));
    }
    if (row.bloom_low_confidence) {
      r.notices.push_back(q + ": no Bloom verb matched; level defaulted to Understand (low confidence)");
    }
    for (const auto& f : row.flags) {
      if (std::find(r.flags.begin(), r.flags.end(), f) == r.flags.end()) r.flags.push_back(f);
    }
  }
  // Neutral statements keep both lists non-empty; with no rule firing at
  // all this yields exactly the two neutral lines.
  if (r.strengths.empty()) r.strengths.emplace_back(kN1Strength);
  if (r.weaknesses.empty()) r.weaknesses.emplace_back(kN1Weakness);
  std::sort(r.flags.begin(), r.flags.end());

  auto agg = fusion::aggregate_assignment(std::span<const double>(scores), ctx.thresholds);
  r.assignment_score = agg.score;
  r.assignment_band = agg.band;
  r.questions = std::move(rows);
  return r;
}

// ---------------------------------------------------------------------------
// JSON

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::optional<double> number_or_null(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline json to_json(const QuestionRow& row) {
  json weights = json::array();
  for (double w : row.bloom_weights) weights.push_back(w);
  json matched = json::array();
  for (const auto& m : row.matched_terms) matched.push_back({{"term", m.term}, {"level", bloom::to_string(m.level)}});
  return {
      {"index", row.index},
      {"text", row.text},
      {"marker", row.marker ? json(*row.marker) : json(nullptr)},
      {"char_span", {row.char_span.start, row.char_span.end}},
      {"bloom",
       {{"weights", weights},
        {"dominant", bloom::to_string(row.dominant)},
        {"matched_terms", matched},
        {"low_confidence", row.bloom_low_confidence}}},
      {"subscores",
       {{"judge", optional_number(row.subscores.judge)},
        {"bloom", optional_number(row.subscores.bloom)},
        {"semantic", optional_number(row.subscores.semantic)},
        {"lexical", optional_number(row.subscores.lexical)}}},
      {"weights_used",
       {{"judge", row.weights_used.judge},
        {"bloom", row.weights_used.bloom},
        {"semantic", row.weights_used.semantic},
        {"lexical", row.weights_used.lexical}}},
      {"score", row.score},
      {"band", fusion::to_string(row.band)},
      {"features",
       {{"mean_tfidf", optional_number(row.mean_tfidf)},
        {"max_boilerplate_similarity", optional_number(row.max_boilerplate_similarity)},
        {"nearest_prompt", row.nearest_prompt ? json(*row.nearest_prompt) : json(nullptr)},
        {"judge_rationale", row.judge_rationale ? json(*row.judge_rationale) : json(nullptr)}}},
      {"flags", row.flags},
  };
}

inline fusion::Band band_from_json(const json& j) {
  auto b = fusion::band_from_string(j.get<std::string>());
  if (!b) throw Error(ErrorCode::MalformedInput, "unknown band '" + j.get<std::string>() + "'");
  return *b;
}

inline bloom::Level level_from_json(const json& j) {
  auto l = bloom::level_from_string(j.get<std::string>());
  if (!l) throw Error(ErrorCode::MalformedInput, "unknown Bloom level '" + j.get<std::string>() + "'");
  return *l;
}

inline QuestionRow question_row_from_json(const json& j) {
  QuestionRow row;
  row.index = j.at("index").get<std::size_t>();
  row.text = j.at("text").get<std::string>();
  if (j.contains("marker") && !j["marker"].is_null()) row.marker = j["marker"].get<std::string>();
  if (j.contains("char_span")) row.char_span = {j["char_span"].at(0).get<std::size_t>(), j["char_span"].at(1).get<std::size_t>()};
  const auto& b = j.at("bloom");
  const auto& w = b.at("weights");
  if (!w.is_array() || w.size() != bloom::kLevelCount) throw Error(ErrorCode::MalformedInput, "bloom weights must have 6 entries");
  for (std::size_t i = 0; i < bloom::kLevelCount; ++i) row.bloom_weights[i] = w[i].get<double>();
  row.dominant = level_from_json(b.at("dominant"));
  if (b.contains("matched_terms")) {
    for (const auto& m : b["matched_terms"]) row.matched_terms.push_back({m.at("term").get<std::string>(), level_from_json(m.at("level"))});
  }
  row.bloom_low_confidence = b.value("low_confidence", false);
  const auto& s = j.at("subscores");
  row.subscores = {number_or_null(s.at("judge")), number_or_null(s.at("bloom")), number_or_null(s.at("semantic")),
                   number_or_null(s.at("lexical"))};
  if (j.contains("weights_used")) {
    const auto& wu = j["weights_used"];
    row.weights_used = {wu.at("judge").get<double>(), wu.at("bloom").get<double>(), wu.at("semantic").get<double>(),
                        wu.at("lexical").get<double>()};
  }
  row.score = j.at("score").get<double>();
  row.band = band_from_json(j.at("band"));
  if (j.contains("features")) {
    const auto& f = j["features"];
    row.mean_tfidf = number_or_null(f.value("mean_tfidf", json(nullptr)));
    row.max_boilerplate_similarity = number_or_null(f.value("max_boilerplate_similarity", json(nullptr)));
    if (f.contains("nearest_prompt") && !f["nearest_prompt"].is_null()) row.nearest_prompt = f["nearest_prompt"].get<std::string>();
    if (f.contains("judge_rationale") && !f["judge_rationale"].is_null()) row.judge_rationale = f["judge_rationale"].get<std::string>();
  }
  if (j.contains("flags")) row.flags = j["flags"].get<std::vector<std::string>>();
  return row;
}

inline json to_json(const Recommendation& r) {
  return {{"question_index", r.question_index}, {"kind", to_string(r.kind)}, {"text", r.text}, {"trigger", r.trigger}};
}

inline json to_json(const AnalysisReport& r) {
  json questions = json::array();
  for (const auto& q : r.questions) questions.push_back(to_json(q));
  json recs = json::array();
  for (const auto& rec : r.recommendations) recs.push_back(to_json(rec));
  return {
      {"id", r.id},
      {"title", r.title},
      {"source_format", to_string(r.source_format)},
      {"created_at", r.created_at},
      {"ingested_at", r.ingested_at},
      {"tool_version", r.tool_version},
      {"config_hash", r.config_hash},
      {"questions", questions},
      {"assignment",
       {{"score", r.assignment_score},
        {"band", fusion::to_string(r.assignment_band)},
        {"holistic_judge", optional_number(r.holistic_judge)}}},
      {"strengths", r.strengths},
      {"weaknesses", r.weaknesses},
      {"recommendations", recs},
      {"ranking", r.ranking},
      {"flags", r.flags},
      {"notices", r.notices},
  };
}

/// Throws MalformedInput on schema violations.
inline AnalysisReport report_from_json(const json& j) {
  try {
    AnalysisReport r;
    r.id = j.at("id").get<std::string>();
    r.title = j.at("title").get<std::string>();
    r.source_format = source_format_from_string(j.value("source_format", std::string("PlainText")));
    r.created_at = j.at("created_at").get<std::string>();
    r.ingested_at = j.value("ingested_at", std::string());
    r.tool_version = j.at("tool_version").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& q : j.at("questions")) r.questions.push_back(question_row_from_json(q));
    const auto& a = j.at("assignment");
    r.assignment_score = a.at("score").get<double>();
    r.assignment_band = band_from_json(a.at("band"));
    if (a.contains("holistic_judge")) r.holistic_judge = number_or_null(a["holistic_judge"]);
    r.strengths = j.at("strengths").get<std::vector<std::string>>();
    r.weaknesses = j.at("weaknesses").get<std::vector<std::string>>();
    for (const auto& rec : j.at("recommendations")) {
      r.recommendations.push_back({rec.at("question_index").get<std::size_t>(),
                                   recommendation_kind_from_string(rec.at("kind").get<std::string>()),
                                   rec.at("text").get<std::string>(), rec.at("trigger").get<std::string>()});
    }
    if (j.contains("ranking")) r.ranking = j["ranking"].get<std::vector<std::size_t>>();
    if (j.contains("flags")) r.flags = j["flags"].get<std::vector<std::string>>();
    if (j.contains("notices")) r.notices = j["notices"].get<std::vector<std::string>>();
    if (r.questions.empty()) throw Error(ErrorCode::MalformedInput, "report has no questions");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("report JSON: ") + e.what());
  }
}

/// Canonical serialization: sorted keys, two-space indent, trailing LF.
inline std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Markdown

inline std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline std::string render_markdown(const AnalysisReport& r) {
  std::ostringstream md;
  md << "# AI-solvability report: " << r.title << "\n\n";
  md << "- Assignment score: **" << format_score(r.assignment_score) << "%** (" << fusion::to_string(r.assignment_band)
     << ")\n";
  if (r.holistic_judge) md << "- Holistic judge estimate: " << format_score(*r.holistic_judge) << "%\n";
  md << "- Questions: " << r.questions.size() << "\n";
  md << "- Generated: " << r.created_at << " by bloomgate " << r.tool_version << " (config " << r.config_hash.substr(0, 12)
     << ")\n";
  for (const auto& f : r.flags) md << "- Flag: `" << f << "`\n";
  md << "\n## Questions\n\n";
  md << "| # | Score | Band | Bloom | Judge | Bloom sub | Semantic | Lexical | Question |\n";
  md << "|---|---|---|---|---|---|---|---|---|\n";
  auto cell = [](const std::optional<double>& v) { return v ? format_score(*v) : std::string("n/a"); };
  for (const auto& q : r.questions) {
    std::string text = q.text;
    for (auto& c : text) {
      if (c == '|') c = '/';
    }
    md << "| " << q.index + 1 << " | " << format_score(q.score) << " | " << fusion::to_string(q.band) << " | "
       << bloom::to_string(q.dominant) << " | " << cell(q.subscores.judge) << " | " << cell(q.subscores.bloom) << " | "
       << cell(q.subscores.semantic) << " | " << cell(q.subscores.lexical) << " | " << text << " |\n";
  }
  md << "\n## Strengths\n\n";
  for (const auto& s : r.strengths) md << "- " << s << "\n";
  md << "\n## Weaknesses\n\n";
  for (const auto& s : r.weaknesses) md << "- " << s << "\n";
  md << "\n## Recommendations\n\n";
  if (r.recommendations.empty()) md << "None.\n";
  for (const auto& rec : r.recommendations) md << "- [" << rec.trigger << "] " << rec.text << "\n";
  if (!r.notices.empty()) {
    md << "\n## Notices\n\n";
    for (const auto& n : r.notices) md << "- " << n << "\n";
  }
  return md.str();
}

inline std::string csv_escape(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

/// One row per question.
inline std::string render_csv(const AnalysisReport& r) {
  std::ostringstream out;
  out << "index,score,band,dominant,judge,bloom,semantic,lexical,text\n";
  auto cell = [](const std::optional<double>& v) { return v ? format_score(*v) : std::string(); };
  for (const auto& q : r.questions) {
    out << q.index << ',' << format_score(q.score) << ',' << fusion::to_string(q.band) << ',' << bloom::to_string(q.dominant)
        << ',' << cell(q.subscores.judge) << ',' << cell(q.subscores.bloom) << ',' << cell(q.subscores.semantic) << ','
        << cell(q.subscores.lexical) << ',' << csv_escape(q.text) << '\n';
  }
  return out.str();
}

}  // namespace bloomgate::feedback
