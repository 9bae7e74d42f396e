#include <gtest/gtest.h>

#include <random>

#include "bloomgate/bloom.hpp"

using namespace bloomgate;
using bloom::Level;

namespace {

bloom::BloomProfile profile_of(const bloom::LevelWeights& w) {
  bloom::BloomProfile p;
  p.weights = w;
  p.dominant = bloom::dominant_of(w);
  return p;
}

// Independent dot-product oracle over the S table.
double dot_oracle(const bloom::LevelWeights& w) {
  const double s[6] = {90, 80, 65, 50, 40, 30};
  double acc = 0;
  for (int i = 0; i < 6; ++i) acc += w[i] * s[i];
  return acc;
}

}  // namespace

TEST(Bloom, LevelOrderingAndNames) {
  for (std::size_t i = 0; i + 1 < bloom::kLevelCount; ++i) {
    EXPECT_LT(static_cast<int>(bloom::kAllLevels[i]), static_cast<int>(bloom::kAllLevels[i + 1]));
  }
  EXPECT_EQ(static_cast<int>(Level::Remember), 1);
  EXPECT_EQ(static_cast<int>(Level::Create), 6);
  for (auto l : bloom::kAllLevels) EXPECT_EQ(bloom::level_from_string(bloom::to_string(l)), l);
  EXPECT_FALSE(bloom::level_from_string("Producing").has_value());
}

TEST(Bloom, ShippedLexiconIsValid) {
  const auto& lex = bloom::VerbLexicon::shipped();
  EXPECT_GE(lex.size(), 100u);
  EXPECT_EQ(lex.version(), "bloom-lexicon-1");
  for (const auto& [term, e] : lex.entries()) {
    EXPECT_GT(e.weight, 0.0) << term;
    EXPECT_EQ(term, text::lowercase(term));
  }
  EXPECT_EQ(lex.find("define")->level, Level::Remember);
  EXPECT_EQ(lex.find("explain")->level, Level::Understand);
  EXPECT_EQ(lex.find("apply")->level, Level::Apply);
  EXPECT_EQ(lex.find("compare")->level, Level::Analyze);
  EXPECT_EQ(lex.find("evaluate")->level, Level::Evaluate);
  EXPECT_EQ(lex.find("design")->level, Level::Create);
}

TEST(Bloom, DefineIsPureRemember) {
  auto p = bloom::classify("Define the term operating system.");
  EXPECT_EQ(p.dominant, Level::Remember);
  EXPECT_EQ(p.weights, (bloom::LevelWeights{1, 0, 0, 0, 0, 0}));
  EXPECT_FALSE(p.low_confidence);
  ASSERT_EQ(p.matched_terms.size(), 1u);
  EXPECT_EQ(p.matched_terms[0].term, "define");
}

TEST(Bloom, ThreeWayTieGoesToHigherLevel) {
  auto p = bloom::classify("Compare and evaluate two consensus protocols, then design an improvement.");
  const double third = 1.0 / 3.0;
  EXPECT_NEAR(p.weights[3], third, 1e-12);
  EXPECT_NEAR(p.weights[4], third, 1e-12);
  EXPECT_NEAR(p.weights[5], third, 1e-12);
  EXPECT_EQ(p.weights[0] + p.weights[1] + p.weights[2], 0.0);
  EXPECT_EQ(p.dominant, Level::Create);
}

TEST(Bloom, EmptyQuestion) {
  for (const char* s : {"", "   \n"}) {
    try {
      bloom::classify(s);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::EmptyQuestion);
    }
  }
}

TEST(Bloom, NoHitFallback) {
  auto p = bloom::classify("Quantum chromodynamics and the moon.");
  EXPECT_TRUE(p.low_confidence);
  EXPECT_EQ(p.dominant, Level::Understand);
  EXPECT_EQ(p.weights, bloom::LevelWeights{});
  EXPECT_TRUE(p.matched_terms.empty());
  EXPECT_DOUBLE_EQ(bloom::bloom_subscore(p), 80.0);
}

TEST(Bloom, CanonicalSingleVerbs) {
  const std::pair<const char*, Level> cases[] = {
      {"Define the term process.", Level::Remember},
      {"Explain how virtual memory works.", Level::Understand},
      {"Apply Dijkstra's algorithm to the graph below.", Level::Apply},
      {"Compare TCP with UDP.", Level::Analyze},
      {"Evaluate this sorting strategy.", Level::Evaluate},
      {"Design a caching layer for the service.", Level::Create},
  };
  for (const auto& [q, level] : cases) {
    auto p = bloom::classify(q);
    EXPECT_EQ(p.dominant, level) << q;
    EXPECT_DOUBLE_EQ(p.weights[bloom::slot(level)], 1.0) << q;
  }
}

TEST(Bloom, StemmerInflections) {
  EXPECT_EQ(bloom::stem("defining"), "defin");
  EXPECT_EQ(bloom::stem("compared"), "compar");
  EXPECT_EQ(bloom::stem("planning"), "plan");
  EXPECT_EQ(bloom::stem("designs"), "design");
  EXPECT_EQ(bloom::stem("class"), "class");
  EXPECT_EQ(bloom::classify("Designing a protocol").dominant, Level::Create);
  EXPECT_EQ(bloom::classify("Having compared both, ...").dominant, Level::Analyze);
  EXPECT_EQ(bloom::classify("Defines the scope").dominant, Level::Remember);
}

TEST(Bloom, PhrasesBeatTheirWords) {
  auto lex = bloom::VerbLexicon::parse("break down\tAnalyze\nbreak\tApply\ndown\tRemember\n");
  auto p = bloom::classify("Break down the problem.", lex);
  ASSERT_EQ(p.matched_terms.size(), 1u);
  EXPECT_EQ(p.matched_terms[0].term, "break down");
  EXPECT_EQ(p.dominant, Level::Analyze);
}

TEST(Bloom, CaseInsensitive) {
  for (const char* q : {"Compare and evaluate designs", "List and describe three schedulers", "what is a mutex"}) {
    EXPECT_EQ(bloom::classify(q), bloom::classify(text::uppercase(q))) << q;
  }
}

TEST(Bloom, WeightsRespected) {
  auto lex = bloom::VerbLexicon::parse("define\tRemember\t3\ndesign\tCreate\t1\n");
  auto p = bloom::classify("define then design", lex);
  EXPECT_DOUBLE_EQ(p.weights[0], 0.75);
  EXPECT_DOUBLE_EQ(p.weights[5], 0.25);
  EXPECT_EQ(p.dominant, Level::Remember);
}

TEST(Bloom, LexiconExtensionNeverLowersLevelMass) {
  std::mt19937 rng(7);
  const std::vector<std::string> verbs = {"define", "explain", "apply", "compare", "evaluate", "design", "list", "justify"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string q;
    int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) q += verbs[rng() % verbs.size()] + " the thing ";
    auto before = bloom::classify(q);
    const auto& v = verbs[rng() % verbs.size()];
    auto after = bloom::classify(q + " " + v);
    auto lvl = bloom::VerbLexicon::shipped().find(v)->level;
    double raw_before = before.weights[bloom::slot(lvl)] * static_cast<double>(before.matched_terms.size());
    double raw_after = after.weights[bloom::slot(lvl)] * static_cast<double>(after.matched_terms.size());
    EXPECT_GE(raw_after + 1e-9, raw_before);
    EXPECT_GE(raw_after, 1.0 - 1e-9);
  }
}

TEST(Bloom, LexiconParserErrors) {
  auto expect_line = [](const std::string& content, const std::string& needle) {
    try {
      bloom::VerbLexicon::parse(content);
      FAIL() << content;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidLexicon);
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_line("define\tRemember\n# c\ndefine\tCreate\n", "line 3");
  expect_line("define\tRemembering\n", "unknown level");
  expect_line("define\tRemember\t0\n", "line 1");
  expect_line("define\tRemember\t-1\n", "positive");
  expect_line("define\n", "line 1");
  expect_line("a b c\tCreate\n", "two words");
  expect_line("# nothing\n", "no entries");
}

TEST(Bloom, SubscoreTable) {
  EXPECT_DOUBLE_EQ(bloom::bloom_subscore(profile_of({1, 0, 0, 0, 0, 0})), 90.0);
  EXPECT_DOUBLE_EQ(bloom::bloom_subscore(profile_of({0, 0, 0, 0, 0, 1})), 30.0);
  const double u = 1.0 / 6.0;
  EXPECT_NEAR(bloom::bloom_subscore(profile_of({u, u, u, u, u, u})), 355.0 / 6.0, 1e-9);
  EXPECT_NEAR(355.0 / 6.0, 59.1667, 1e-4);
}

TEST(Bloom, SubscoreMatchesDotOracleAndStaysInRange) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 500; ++i) {
    bloom::LevelWeights w;
    double sum = 0;
    for (auto& x : w) sum += (x = u(rng));
    for (auto& x : w) x /= sum;
    double s = bloom::bloom_subscore(profile_of(w));
    EXPECT_NEAR(s, dot_oracle(w), 1e-9);
    EXPECT_GE(s, 30.0 - 1e-9);
    EXPECT_LE(s, 90.0 + 1e-9);
  }
}

TEST(Bloom, SubscoreMonotoneUnderDownwardMassShift) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    bloom::LevelWeights w;
    double sum = 0;
    for (auto& x : w) sum += (x = u(rng));
    for (auto& x : w) x /= sum;
    std::size_t lo = rng() % 5;
    std::size_t hi = lo + 1 + rng() % (5 - lo);
    double delta = w[hi] * u(rng);
    auto shifted = w;
    shifted[hi] -= delta;
    shifted[lo] += delta;
    EXPECT_GE(bloom::bloom_subscore(profile_of(shifted)) + 1e-12, bloom::bloom_subscore(profile_of(w)));
  }
}

TEST(Bloom, SolvabilityTableValidation) {
  bloom::SolvabilityTable t;
  EXPECT_TRUE(t.strictly_decreasing());
  t.values[2] = t.values[1];
  EXPECT_FALSE(t.strictly_decreasing());
}
