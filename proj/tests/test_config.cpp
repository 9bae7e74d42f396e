#include <gtest/gtest.h>

#include "bloomgate/config.hpp"
#include "support.hpp"

using namespace bloomgate;

TEST(Config, DefaultsAreValid) {
  Config c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.weights, fusion::FusionWeights{});
  EXPECT_TRUE(c.thresholds.is_default());
  EXPECT_EQ(c.max_questions_sync, 25u);
}

TEST(Config, ParsesSectionsCommentsAndLists) {
  auto c = Config::parse(R"(# comment
[server]
host = "0.0.0.0"
port = 9000   # trailing comment
require_auth = true

[providers.chat]
base_url = "http://localhost:1234/v1"
model = "m"
max_retries = 4

[fusion.weights]
judge = 0.4
bloom = 0.3
semantic = 0.2
lexical = 0.1

[bands]
thresholds = [40, 60, 80]

[bloom]
solvability = [90, 80, 70, 50, 40, 30]

[limits]
max_questions_sync = 3
)");
  EXPECT_EQ(c.server_host, "0.0.0.0");
  EXPECT_EQ(c.server_port, 9000);
  EXPECT_TRUE(c.require_auth);
  EXPECT_EQ(c.chat.base_url, "http://localhost:1234/v1");
  EXPECT_EQ(c.chat.model_name, "m");
  EXPECT_EQ(c.chat.max_retries, 4);
  EXPECT_DOUBLE_EQ(c.weights.judge, 0.4);
  EXPECT_DOUBLE_EQ(c.thresholds.high, 80.0);
  EXPECT_DOUBLE_EQ(c.bloom_table.values[0], 90.0);
  EXPECT_EQ(c.max_questions_sync, 3u);
}

TEST(Config, RejectsBadInput) {
  for (const char* bad : {"nonsense", "[server\nport = 1", "unknown = 1", "[server]\nport = abc",
                          "[fusion.weights]\njudge = 0.9", "[bands]\nthresholds = [70, 60, 80]",
                          "[bloom]\nsolvability = [10, 20, 30, 40, 50, 60]", "[bands]\nthresholds = [1, 2]",
                          "[limits]\nprovider_parallelism = 0"}) {
    try {
      Config::parse(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidConfig) << bad;
    }
  }
}

TEST(Config, ErrorNamesLine) {
  try {
    Config::parse("[server]\n\nport = x\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Config, LoadFromFile) {
  bgtest::TempDir dir;
  auto path = dir / "c.toml";
  bgtest::write_file(path, "[store]\npath = \"/tmp/x\"\n");
  EXPECT_EQ(Config::load(path.string()).store_path, "/tmp/x");
  EXPECT_THROW(Config::load((dir / "missing.toml").string()), Error);
}
