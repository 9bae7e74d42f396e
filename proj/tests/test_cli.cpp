#include <gtest/gtest.h>

#include <sstream>

#include "bloomgate/cli.hpp"
#include "support.hpp"

using namespace bloomgate;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kDoc = "Q1. Define TCP.\nQ2. Design and justify a caching strategy for a campus portal.\n";

}  // namespace

TEST(Cli, AnalyzeMockWritesJsonReport) {
  bgtest::TempDir dir;
  bgtest::write_file(dir / "hw1.txt", kDoc);
  bgtest::write_file(dir / "hw1.mock.json", R"({"chat": {"responses": {"Define TCP.": "AI-SOLVABILITY: 85%"}}})");
  auto r = run({"analyze", (dir / "hw1.txt").string(), "--mock", "--fixed-time", "2025-05-05T05:05:05Z"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto report_path = dir / "hw1.report.json";
  ASSERT_TRUE(std::filesystem::exists(report_path));
  auto report = feedback::report_from_json(nlohmann::json::parse(bgtest::read_file(report_path)));
  EXPECT_EQ(report.questions.size(), 2u);
  EXPECT_DOUBLE_EQ(*report.questions[0].subscores.judge, 85.0);
  EXPECT_EQ(report.created_at, "2025-05-05T05:05:05Z");
  EXPECT_EQ(report.ingested_at, "2025-05-05T05:05:05Z");
  EXPECT_NE(r.out.find("analyzed 1 file(s): 1 ok, 0 failed;"), std::string::npos) << r.out;
}

TEST(Cli, FixedTimeIsByteIdentical) {
  bgtest::TempDir dir;
  bgtest::write_file(dir / "a.txt", kDoc);
  auto args = std::vector<std::string>{"analyze", (dir / "a.txt").string(), "--mock", "--fixed-time",
                                       "2025-01-01T00:00:00Z", "--out"};
  ASSERT_EQ(run({args[0], args[1], args[2], args[3], args[4], args[5], (dir / "o1").string()}).code, 0);
  ASSERT_EQ(run({args[0], args[1], args[2], args[3], args[4], args[5], (dir / "o2").string()}).code, 0);
  auto x = bgtest::read_file(dir / "o1" / "a.report.json");
  EXPECT_FALSE(x.empty());
  EXPECT_EQ(x, bgtest::read_file(dir / "o2" / "a.report.json"));
}

TEST(Cli, MarkdownCsvAndTranscripts) {
  bgtest::TempDir dir;
  bgtest::write_file(dir / "a.md", "# Quiz\n\n1. **Define** TCP.\n2. Compare TCP and UDP.\n");
  auto r = run({"analyze", (dir / "a.md").string(), "--mock", "--format", "md", "--transcripts"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(bgtest::read_file(dir / "a.report.md").find("## Recommendations"), std::string::npos);
  auto t = nlohmann::json::parse(bgtest::read_file(dir / "a.transcripts.json"));
  EXPECT_EQ(t.size(), 3u);
  r = run({"analyze", (dir / "a.md").string(), "--mock", "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(bgtest::read_file(dir / "a.report.csv").rfind("index,score,band", 0), 0u);
}

TEST(Cli, PdfAndTextBatch) {
  bgtest::TempDir dir;
  bgtest::write_file(dir / "p.pdf", bgtest::make_pdf({"Q1. Define TCP.\nQ2. Explain routing.", "Q3. Design a protocol."}, true));
  bgtest::write_file(dir / "t.txt", kDoc);
  auto r = run({"analyze", (dir / "p.pdf").string(), (dir / "t.txt").string(), "--mock", "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto pdf_report = feedback::report_from_json(nlohmann::json::parse(bgtest::read_file(dir / "out" / "p.report.json")));
  EXPECT_EQ(pdf_report.questions.size(), 3u);
  EXPECT_EQ(pdf_report.source_format, SourceFormat::Pdf);
  EXPECT_NE(r.out.find("analyzed 2 file(s): 2 ok, 0 failed;"), std::string::npos);

  auto h = run({"histogram", (dir / "out").string()});
  ASSERT_EQ(h.code, 0) << h.err;
  EXPECT_EQ(nlohmann::json::parse(h.out)["total"], 2);
}

TEST(Cli, MissingInputIsExit1) {
  bgtest::TempDir dir;
  auto r = run({"analyze", (dir / "nope.txt").string(), "--mock"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nope.txt"), std::string::npos);
}

TEST(Cli, EmptyAndUnsupportedInputsFailPerFile) {
  bgtest::TempDir dir;
  bgtest::write_file(dir / "empty.txt", "  \n");
  bgtest::write_file(dir / "x.docx", "zz");
  bgtest::write_file(dir / "good.txt", kDoc);
  auto r = run({"analyze", (dir / "empty.txt").string(), (dir / "x.docx").string(), (dir / "good.txt").string(), "--mock"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("3 file(s): 1 ok, 2 failed"), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "good.report.json"));
}

TEST(Cli, ProviderOutageIsExit2) {
  bgtest::TempDir dir;
  bgtest::write_file(dir / "a.txt", kDoc);
  bgtest::write_file(dir / "a.mock.json", R"({"chat": {"fail": true}, "embed": {"fail": true}})");
  EXPECT_EQ(run({"analyze", (dir / "a.txt").string(), "--mock"}).code, 2);
}

TEST(Cli, ChatOutageStillSucceedsWithFlag) {
  bgtest::TempDir dir;
  bgtest::write_file(dir / "a.txt", kDoc);
  bgtest::write_file(dir / "a.mock.json", R"({"chat": {"fail": true}})");
  ASSERT_EQ(run({"analyze", (dir / "a.txt").string(), "--mock"}).code, 0);
  auto j = nlohmann::json::parse(bgtest::read_file(dir / "a.report.json"));
  EXPECT_EQ(j["flags"], nlohmann::json::array({"judge-unavailable"}));
}

TEST(Cli, ConfigAndUsageErrorsAreExit3) {
  bgtest::TempDir dir;
  bgtest::write_file(dir / "a.txt", kDoc);
  bgtest::write_file(dir / "bad.toml", "[fusion.weights]\njudge = 0.9\n");
  EXPECT_EQ(run({"analyze", (dir / "a.txt").string(), "--mock", "--config", (dir / "bad.toml").string()}).code, 3);
  EXPECT_EQ(run({"analyze", (dir / "a.txt").string(), "--mock", "--fixed-time", "soon"}).code, 3);
  EXPECT_EQ(run({"analyze", (dir / "a.txt").string(), "--format", "pdf"}).code, 3);
  EXPECT_EQ(run({"frobnicate"}).code, 3);
  EXPECT_EQ(run({}).code, 3);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, HistogramEdgeCases) {
  bgtest::TempDir dir;
  auto empty = run({"histogram", dir.path().string()});
  ASSERT_EQ(empty.code, 0);
  EXPECT_EQ(nlohmann::json::parse(empty.out)["total"], 0);
  bgtest::write_file(dir / "broken.report.json", "{oops");
  bgtest::write_file(dir / "x.mock.json", "{}");
  auto warn = run({"histogram", dir.path().string(), "--csv"});
  EXPECT_EQ(warn.code, 0);
  EXPECT_NE(warn.err.find("broken.report.json"), std::string::npos);
  EXPECT_EQ(warn.err.find("x.mock.json"), std::string::npos);
  EXPECT_EQ(warn.out, "band,count\nLow,0\nMedium,0\nMedium-High,0\nHigh,0\n");
  EXPECT_EQ(run({"histogram", (dir / "missing").string()}).code, 1);
}

TEST(Cli, LexiconCheck) {
  bgtest::TempDir dir;
  auto shipped = std::string(BG_FIXTURE_DIR) + "/../../data/default_lexicon.tsv";
  auto ok = run({"lexicon", "check", shipped});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(ok.out.rfind("ok: ", 0), 0u);
  EXPECT_NE(ok.out.find("bloom-lexicon-1"), std::string::npos);
  bgtest::write_file(dir / "bad.tsv", "define\tRemember\nrecall\tNotALevel\n");
  auto bad = run({"lexicon", "check", (dir / "bad.tsv").string()});
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.err.find("line 2"), std::string::npos) << bad.err;
  EXPECT_EQ(run({"lexicon", "check", (dir / "none.tsv").string()}).code, 1);
}
