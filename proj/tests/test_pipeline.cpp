#include <gtest/gtest.h>

#include "bloomgate/mock.hpp"
#include "bloomgate/pipeline.hpp"

using namespace bloomgate;

namespace {

const auto kFixed = feedback::parse_utc("2025-03-01T12:00:00Z");

AssessmentDocument make_doc(const std::string& body) {
  auto d = extract_text(body, SourceFormat::PlainText, "Pipeline test");
  d.ingested_at = kFixed;
  return d;
}

std::shared_ptr<mock::ScriptedChatTransport> chat(const std::string& script_json = "{}") {
  return std::make_shared<mock::ScriptedChatTransport>(mock::MockScript::from_json(nlohmann::json::parse(script_json)));
}

std::shared_ptr<semantic::EmbeddingProvider> embed() { return std::make_shared<semantic::TermFrequencyEmbedder>(); }

const std::string kTwo = "Q1. Define TCP.\nQ2. Design and justify a caching strategy for a campus web portal.\n";

}  // namespace

TEST(Pipeline, FullRunProducesConsistentReport) {
  Analyzer a(Config{}, chat(R"({"chat": {"responses": {"Define TCP.": "AI-SOLVABILITY: 85%"}}})"), embed());
  auto out = a.analyze(make_doc(kTwo), {kFixed});
  const auto& r = out.report;
  ASSERT_EQ(r.questions.size(), 2u);
  const auto& q0 = r.questions[0];
  EXPECT_EQ(q0.dominant, bloom::Level::Remember);
  EXPECT_DOUBLE_EQ(*q0.subscores.judge, 85.0);
  EXPECT_DOUBLE_EQ(*q0.subscores.semantic, 100.0);
  // Independent recomputation of the fused value from the reported subscores.
  double expect = 0.5 * *q0.subscores.judge + 0.2 * *q0.subscores.bloom + 0.2 * *q0.subscores.semantic +
                  0.1 * *q0.subscores.lexical;
  EXPECT_NEAR(q0.score, expect, 1e-9);
  EXPECT_EQ(q0.band, fusion::band(q0.score));
  EXPECT_NEAR(r.assignment_score, (r.questions[0].score + r.questions[1].score) / 2.0, 1e-9);
  EXPECT_EQ(r.questions[1].dominant, bloom::Level::Create);
  EXPECT_TRUE(r.flags.empty());
  ASSERT_TRUE(r.holistic_judge.has_value());
  EXPECT_EQ(r.created_at, "2025-03-01T12:00:00Z");
  EXPECT_EQ(r.config_hash, a.config_hash());
  EXPECT_EQ(r.config_hash.size(), 64u);
  // Two question calls plus the holistic call.
  EXPECT_EQ(out.transcripts.size(), 3u);
  EXPECT_FALSE(out.transcripts.back().question_index.has_value());
}

TEST(Pipeline, DeterministicUnderFixedClock) {
  Analyzer a(Config{}, chat(), embed());
  auto d = make_doc(kTwo);
  auto x = feedback::canonical_dump(feedback::to_json(a.analyze(d, {kFixed}).report));
  Analyzer b(Config{}, chat(), embed());
  auto y = feedback::canonical_dump(feedback::to_json(b.analyze(d, {kFixed}).report));
  EXPECT_EQ(x, y);
}

TEST(Pipeline, ChatDownRedistributesAndFlags) {
  Analyzer a(Config{}, chat(R"({"chat": {"fail": true}})"), embed());
  auto r = a.analyze(make_doc(kTwo), {kFixed}).report;
  for (const auto& q : r.questions) {
    EXPECT_TRUE(q.has_flag(feedback::kFlagJudgeUnavailable));
    EXPECT_FALSE(q.subscores.judge.has_value());
    EXPECT_NEAR(q.weights_used.bloom, 0.4, 1e-12);
    EXPECT_NEAR(q.weights_used.semantic, 0.4, 1e-12);
    EXPECT_NEAR(q.weights_used.lexical, 0.2, 1e-12);
    EXPECT_NEAR(q.score, 0.4 * *q.subscores.bloom + 0.4 * *q.subscores.semantic + 0.2 * *q.subscores.lexical, 1e-9);
  }
  EXPECT_EQ(r.flags, (std::vector<std::string>{"judge-unavailable"}));
  EXPECT_FALSE(r.holistic_judge.has_value());
}

TEST(Pipeline, NoChatConfiguredBehavesLikeChatDown) {
  Analyzer a(Config{}, nullptr, embed());
  auto r = a.analyze(make_doc(kTwo), {kFixed}).report;
  EXPECT_TRUE(r.questions[0].has_flag(feedback::kFlagJudgeUnavailable));
}

TEST(Pipeline, EmbedDownRedistributesAndFlags) {
  Analyzer a(Config{}, chat(), std::make_shared<mock::FailingEmbedder>());
  auto r = a.analyze(make_doc(kTwo), {kFixed}).report;
  for (const auto& q : r.questions) {
    EXPECT_TRUE(q.has_flag(feedback::kFlagSemanticUnavailable));
    EXPECT_NEAR(q.weights_used.judge, 0.5 / 0.8, 1e-12);
  }
}

TEST(Pipeline, BothProvidersDownIsProviderUnavailable) {
  Analyzer a(Config{}, chat(R"({"chat": {"fail": true}})"), std::make_shared<mock::FailingEmbedder>());
  try {
    a.analyze(make_doc(kTwo), {kFixed});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProviderUnavailable);
  }
}

TEST(Pipeline, UnparseableJudgeFlagsOnlyThatQuestion) {
  Analyzer a(Config{}, chat(R"({"chat": {"responses": {"Define TCP.": "no idea"}}})"), embed());
  auto out = a.analyze(make_doc(kTwo), {kFixed});
  EXPECT_TRUE(out.report.questions[0].has_flag(feedback::kFlagJudgeUnavailable));
  EXPECT_FALSE(out.report.questions[1].has_flag(feedback::kFlagJudgeUnavailable));
  // Both attempts for question 0 are kept.
  std::size_t q0 = 0;
  for (const auto& t : out.transcripts) q0 += t.question_index == std::optional<std::size_t>(0);
  EXPECT_EQ(q0, 2u);
}

TEST(Pipeline, NoVerbIsLowConfidence) {
  Analyzer a(Config{}, chat(), embed());
  auto r = a.analyze(make_doc("Q1. Photosynthesis in shaded leaves?\n"), {kFixed}).report;
  EXPECT_TRUE(r.questions[0].bloom_low_confidence);
  EXPECT_TRUE(r.questions[0].has_flag(feedback::kFlagBloomLowConfidence));
  EXPECT_FALSE(r.notices.empty());
}

TEST(Pipeline, EmptyDocumentAndNoQuestions) {
  Analyzer a(Config{}, chat(), embed());
  try {
    a.analyze(make_doc("Q1. Define x."), std::vector<Question>{}, {kFixed});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyAnalysis);
  }
}

TEST(Pipeline, ConfigHashTracksScoringSettings) {
  Analyzer base(Config{}, nullptr, embed());
  Analyzer same(Config{}, chat(), embed());
  EXPECT_EQ(base.config_hash(), same.config_hash());
  Config w;
  w.weights = {0.4, 0.3, 0.2, 0.1};
  EXPECT_NE(Analyzer(w, nullptr, embed()).config_hash(), base.config_hash());
  Config t;
  t.thresholds = {40, 60, 80};
  EXPECT_NE(Analyzer(t, nullptr, embed()).config_hash(), base.config_hash());
  Config p;
  p.server_port = 9999;
  EXPECT_EQ(Analyzer(p, nullptr, embed()).config_hash(), base.config_hash());
}

TEST(Pipeline, CustomThresholdsAddNotice) {
  Config t;
  t.thresholds = {40, 60, 80};
  Analyzer a(t, chat(), embed());
  auto r = a.analyze(make_doc(kTwo), {kFixed}).report;
  bool found = false;
  for (const auto& n : r.notices) found = found || n.find("custom band thresholds") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(Pipeline, ParallelismDoesNotChangeResult) {
  std::string body;
  for (int i = 1; i <= 12; ++i) body += "Q" + std::to_string(i) + ". Explain topic number " + std::to_string(i) + " in detail.\n";
  Config one;
  one.provider_parallelism = 1;
  Config many;
  many.provider_parallelism = 8;
  auto d = make_doc(body);
  auto x = Analyzer(one, chat(), embed()).analyze(d, {kFixed}).report;
  auto y = Analyzer(many, chat(), embed()).analyze(d, {kFixed}).report;
  EXPECT_EQ(feedback::to_json(x), feedback::to_json(y));
}

TEST(Pipeline, TranscriptJsonRoundTrip) {
  Transcript t{3, "sys", "prompt", "raw", ""};
  EXPECT_EQ(transcript_from_json(to_json(t)), t);
  Transcript h{std::nullopt, "", "p", "r", "timeout"};
  EXPECT_EQ(transcript_from_json(to_json(h)), h);
}
