#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "bloomgate/analytics.hpp"
#include "bloomgate/bloom.hpp"
#include "bloomgate/config.hpp"
#include "bloomgate/error.hpp"
#include "bloomgate/feedback.hpp"
#include "bloomgate/fusion.hpp"
#include "bloomgate/ingest.hpp"
#include "bloomgate/judge.hpp"
#include "bloomgate/lexical.hpp"
#include "bloomgate/semantic.hpp"

#ifndef BLOOMGATE_VERSION
#define BLOOMGATE_VERSION "0.1.0"
#endif

namespace bloomgate {

inline constexpr std::string_view kToolVersion = BLOOMGATE_VERSION;

/// Bounds in-flight provider calls. One instance may be shared by every
/// analysis in a process.
class CallLimiter {
 public:
  explicit CallLimiter(std::size_t limit) : sem_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(limit, 1, 1024))) {}

  template <typename F>
  auto run(F&& f) {
    sem_.acquire();
    struct Release {
      std::counting_semaphore<1024>& s;
      ~Release() { s.release(); }
    } release{sem_};
    return f();
  }

 private:
  std::counting_semaphore<1024> sem_;
};

struct Transcript {
  std::optional<std::size_t> question_index;  // nullopt for the holistic call
  std::string system;
  std::string prompt;
  std::string raw_text;
  std::string error;
  bool operator==(const Transcript&) const = default;
};

inline nlohmann::json to_json(const Transcript& t) {
  return {{"question_index", t.question_index ? nlohmann::json(*t.question_index) : nlohmann::json(nullptr)},
          {"system", t.system},
          {"prompt", t.prompt},
          {"raw_text", t.raw_text},
          {"error", t.error}};
}

inline Transcript transcript_from_json(const nlohmann::json& j) {
  Transcript t;
  if (!j.at("question_index").is_null()) t.question_index = j["question_index"].get<std::size_t>();
  t.system = j.value("system", std::string());
  t.prompt = j.at("prompt").get<std::string>();
  t.raw_text = j.at("raw_text").get<std::string>();
  t.error = j.value("error", std::string());
  return t;
}

struct AnalysisOutcome {
  feedback::AnalysisReport report;
  std::vector<Transcript> transcripts;
};

struct AnalyzeOptions {
  std::optional<std::chrono::system_clock::time_point> created_at;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Runs ingest output through every scoring stage and builds the report.
/// Immutable after construction apart from internal caches; analyze() may
/// be called from many threads.
class Analyzer {
 public:
  Analyzer(Config cfg, std::shared_ptr<judge::ChatTransport> chat, std::shared_ptr<semantic::EmbeddingProvider> embed,
           std::shared_ptr<CallLimiter> limiter = nullptr)
      : cfg_(std::move(cfg)),
        chat_(std::move(chat)),
        embed_(std::move(embed)),
        limiter_(limiter ? std::move(limiter) : std::make_shared<CallLimiter>(cfg_.provider_parallelism)),
        cache_(std::make_shared<semantic::EmbeddingCache>()) {
    cfg_.validate();
    lexicon_ = cfg_.lexicon_path ? bloom::VerbLexicon::parse(detail::read_file(*cfg_.lexicon_path))
                                 : bloom::VerbLexicon::shipped();
    stop_ = cfg_.stop_list_path ? lexical::StopList::parse(detail::read_file(*cfg_.stop_list_path))
                                : lexical::StopList::shipped();
    if (cfg_.seed_corpus_path) {
      for (auto line : text::split_lines(detail::read_file(*cfg_.seed_corpus_path))) {
        if (!text::trim(line).empty()) seed_.emplace_back(text::trim(line));
      }
    } else {
      seed_ = lexical::seed_corpus();
    }
    if (cfg_.bank_path) {
      auto content = detail::read_file(*cfg_.bank_path);
      bank_prompts_ = semantic::BoilerplateBank::parse_prompts(content);
    } else {
      bank_prompts_ = semantic::BoilerplateBank::shipped_prompts();
    }
    bank_version_ = "bank-" + text::sha256_hex(text::join(bank_prompts_, "\n")).substr(0, 12);
    config_hash_ = compute_config_hash();
  }

  const Config& config() const { return cfg_; }
  const std::string& config_hash() const { return config_hash_; }
  const bloom::VerbLexicon& lexicon() const { return lexicon_; }

  /// Weights, thresholds, lexicon, bank and prompt versions, and the
  /// Bloom/lexical tuning constants.
  std::string compute_config_hash() const {
    nlohmann::json j = {
        {"weights", {cfg_.weights.judge, cfg_.weights.bloom, cfg_.weights.semantic, cfg_.weights.lexical}},
        {"thresholds", {cfg_.thresholds.medium, cfg_.thresholds.medium_high, cfg_.thresholds.high}},
        {"lexicon_version", lexicon_.version()},
        {"bank_version", bank_version_},
        {"prompt_version", judge::kPromptVersion},
        {"bloom_solvability", cfg_.bloom_table.values},
        {"rarity_saturation", cfg_.rarity_saturation},
    };
    return text::sha256_hex(j.dump());
  }

  AnalysisOutcome analyze(const AssessmentDocument& doc, const AnalyzeOptions& opts = {}) const {
    return analyze(doc, segment_questions(doc), opts);
  }

  AnalysisOutcome analyze(const AssessmentDocument& doc, const std::vector<Question>& questions,
                          const AnalyzeOptions& opts = {}) const {
    if (questions.empty()) throw Error(ErrorCode::EmptyAnalysis, "document has no questions");
    const std::size_t n = questions.size();
    std::vector<feedback::QuestionRow> rows(n);
    std::vector<bloom::BloomProfile> profiles(n);

    for (std::size_t i = 0; i < n; ++i) {
      const auto& q = questions[i];
      auto& row = rows[i];
      row.index = i;
      row.text = q.text;
      row.marker = q.detected_marker;
      row.char_span = q.char_span;
      profiles[i] = bloom::classify(q.text, lexicon_);
      row.bloom_weights = profiles[i].weights;
      row.dominant = profiles[i].dominant;
      row.matched_terms = profiles[i].matched_terms;
      row.bloom_low_confidence = profiles[i].low_confidence;
      if (row.bloom_low_confidence) row.flags.emplace_back(feedback::kFlagBloomLowConfidence);
      row.subscores.bloom = bloom::bloom_subscore(profiles[i], cfg_.bloom_table);
    }

    // Lexical: reference corpus = seed corpus plus this document's questions.
    {
      std::vector<std::string> corpus = seed_;
      for (const auto& q : questions) corpus.push_back(q.text);
      auto model = lexical::fit_corpus(corpus, stop_);
      for (std::size_t i = 0; i < n; ++i) {
        try {
          auto f = lexical::complexity(questions[i].text, model, cfg_.rarity_saturation);
          rows[i].subscores.lexical = f.lexical_subscore;
          rows[i].mean_tfidf = f.mean_tfidf;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::EmptyQuestion) throw;
          rows[i].flags.emplace_back(feedback::kFlagLexicalUnavailable);
        }
      }
    }

    // Semantic and judge stages call providers; run them per question with
    // bounded parallelism and join by index.
    std::vector<std::vector<Transcript>> per_question_transcripts(n);
    std::optional<semantic::BoilerplateBank> bank = load_bank();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < n; i = next++) {
        score_with_providers(questions[i], profiles[i], bank ? &*bank : nullptr, rows[i], per_question_transcripts[i]);
      }
    };
    std::size_t workers = std::min(n, std::max<std::size_t>(1, cfg_.provider_parallelism));
    if (workers <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    bool any_judge = false;
    bool any_semantic = false;
    for (const auto& r : rows) {
      any_judge = any_judge || r.subscores.judge.has_value();
      any_semantic = any_semantic || r.subscores.semantic.has_value();
    }
    if (!any_judge && !any_semantic) {
      throw Error(ErrorCode::ProviderUnavailable, "both the chat and the embedding provider are unavailable");
    }

    for (auto& r : rows) {
      auto s = fusion::fuse(r.subscores, cfg_.weights);
      r.score = s.value;
      r.weights_used = s.weights_used;
      r.band = fusion::band(s.value, cfg_.thresholds);
      std::sort(r.flags.begin(), r.flags.end());
    }

    std::vector<Transcript> transcripts;
    for (auto& t : per_question_transcripts) {
      for (auto& x : t) transcripts.push_back(std::move(x));
    }

    feedback::ReportContext ctx;
    ctx.created_at = feedback::format_utc(opts.created_at.value_or(std::chrono::system_clock::now()));
    ctx.tool_version = std::string(kToolVersion);
    ctx.config_hash = config_hash_;
    ctx.thresholds = cfg_.thresholds;
    ctx.holistic_judge = holistic(questions, profiles, transcripts);
    if (!cfg_.thresholds.is_default()) {
      ctx.notices.push_back("custom band thresholds in use (" + feedback::format_score(cfg_.thresholds.medium) + ", " +
                            feedback::format_score(cfg_.thresholds.medium_high) + ", " +
                            feedback::format_score(cfg_.thresholds.high) +
                            "); bands are not comparable with the standard ease-prediction table");
    }
    std::vector<analytics::TaskRow> task_rows;
    for (const auto& r : rows) {
      task_rows.push_back({r.index, r.score, r.mean_tfidf.value_or(0.0), r.subscores.semantic.value_or(0.0)});
    }
    ctx.ranking = analytics::rank_tasks(task_rows);

    AnalysisOutcome out;
    out.report = feedback::generate_report(std::move(rows), doc, ctx);
    out.transcripts = std::move(transcripts);
    return out;
  }

 private:
  std::optional<semantic::BoilerplateBank> load_bank() const {
    if (!embed_) return std::nullopt;
    try {
      return limiter_->run([&] {
        return semantic::BoilerplateBank::build(bank_prompts_, *embed_, cache_.get(), bank_version_);
      });
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ProviderUnavailable || e.code() == ErrorCode::DimensionMismatch) return std::nullopt;
      throw;
    }
  }

  void score_with_providers(const Question& q, const bloom::BloomProfile& profile, const semantic::BoilerplateBank* bank,
                            feedback::QuestionRow& row, std::vector<Transcript>& transcripts) const {
    if (bank) {
      try {
        auto f = limiter_->run([&] { return semantic::semantic_features(q.text, *bank, *embed_, cache_.get()); });
        row.subscores.semantic = f.semantic_subscore;
        row.max_boilerplate_similarity = f.max_boilerplate_similarity;
        if (!f.nearest_prompt.empty()) row.nearest_prompt = f.nearest_prompt;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ProviderUnavailable && e.code() != ErrorCode::DimensionMismatch) throw;
        row.flags.emplace_back(feedback::kFlagSemanticUnavailable);
      }
    } else {
      row.flags.emplace_back(feedback::kFlagSemanticUnavailable);
    }

    if (!chat_) {
      row.flags.emplace_back(feedback::kFlagJudgeUnavailable);
      return;
    }
    auto record = [&](const std::vector<judge::Exchange>& ex) {
      for (const auto& e : ex) transcripts.push_back({q.index, e.system, e.user, e.raw_text, e.error});
    };
    try {
      auto resp = limiter_->run([&] { return judge::judge_question(q, profile, cfg_.chat, *chat_); });
      record(resp.transcript);
      row.subscores.judge = resp.solvability;
      row.judge_rationale = resp.rationale;
    } catch (const judge::JudgeError& e) {
      record(e.transcript());
      row.flags.emplace_back(feedback::kFlagJudgeUnavailable);
    }
  }

  std::optional<double> holistic(const std::vector<Question>& questions, const std::vector<bloom::BloomProfile>& profiles,
                                 std::vector<Transcript>& transcripts) const {
    if (!chat_) return std::nullopt;
    bloom::LevelWeights mass{};
    for (const auto& p : profiles) {
      for (std::size_t i = 0; i < bloom::kLevelCount; ++i) mass[i] += p.weights[i];
    }
    bool any = std::any_of(mass.begin(), mass.end(), [](double v) { return v > 0.0; });
    auto dominant = any ? bloom::dominant_of(mass) : bloom::Level::Understand;
    auto prompt = judge::build_assignment_prompt(questions, dominant);
    auto record = [&](const std::vector<judge::Exchange>& ex) {
      for (const auto& e : ex) transcripts.push_back({std::nullopt, e.system, e.user, e.raw_text, e.error});
    };
    try {
      auto resp = limiter_->run([&] { return judge::judge_prompt(prompt, cfg_.chat, *chat_); });
      record(resp.transcript);
      return resp.solvability;
    } catch (const judge::JudgeError& e) {
      record(e.transcript());
      return std::nullopt;
    }
  }

  Config cfg_;
  std::shared_ptr<judge::ChatTransport> chat_;
  std::shared_ptr<semantic::EmbeddingProvider> embed_;
  std::shared_ptr<CallLimiter> limiter_;
  std::shared_ptr<semantic::EmbeddingCache> cache_;
  bloom::VerbLexicon lexicon_;
  lexical::StopList stop_;
  std::vector<std::string> seed_;
  std::vector<std::string> bank_prompts_;
  std::string bank_version_;
  std::string config_hash_;
};

}  // namespace bloomgate
