#include <gtest/gtest.h>

#include "bloomgate/ingest.hpp"
#include "bloomgate/pdf.hpp"
#include "support.hpp"

using namespace bloomgate;

namespace {

std::vector<std::string> texts(const std::vector<Question>& qs) {
  std::vector<std::string> out;
  for (const auto& q : qs) out.push_back(q.text);
  return out;
}

void expect_span_invariants(const AssessmentDocument& doc, const std::vector<Question>& qs) {
  ASSERT_FALSE(qs.empty());
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    EXPECT_EQ(qs[i].index, i);
    EXPECT_LE(qs[i].char_span.start, qs[i].char_span.end);
    EXPECT_LE(qs[i].char_span.end, doc.raw_text.size());
    EXPECT_GE(qs[i].char_span.start, prev_end);
    prev_end = qs[i].char_span.end;
    auto sub = doc.raw_text.substr(qs[i].char_span.start, qs[i].char_span.end - qs[i].char_span.start);
    EXPECT_EQ(text::collapse_whitespace(sub), qs[i].text);
  }
}

}  // namespace

TEST(Normalize, StripsBomAndLineEndings) {
  EXPECT_EQ(normalize_text("\xEF\xBB\xBFQ1.\r\nA\rB\tC"), "Q1.\nA\nB C");
}

TEST(Normalize, CollapsesBlankRunsToTwo) {
  EXPECT_EQ(normalize_text("a\n\n\n\n\nb\n"), "a\n\n\nb\n");
  EXPECT_EQ(normalize_text("a\n\n\nb"), "a\n\n\nb");
}

TEST(Normalize, Idempotent) {
  std::string s = "\xEF\xBB\xBFx\r\n\r\n\r\n\r\n\ty\r";
  auto once = normalize_text(s);
  EXPECT_EQ(normalize_text(once), once);
}

TEST(ExtractText, PlainTextIdentity) {
  auto doc = extract_text("Q1. Define TCP.\n", SourceFormat::PlainText);
  EXPECT_EQ(doc.raw_text, "Q1. Define TCP.\n");
  EXPECT_EQ(doc.source_format, SourceFormat::PlainText);
  EXPECT_EQ(doc.title, "Q1. Define TCP.");
  EXPECT_EQ(doc.id.rfind("doc-", 0), 0u);
}

TEST(ExtractText, EmptyInputIsEmptyDocument) {
  try {
    extract_text("", SourceFormat::PlainText);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDocument);
  }
  try {
    extract_text(" \n\t\n", SourceFormat::PlainText);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDocument);
  }
}

TEST(ExtractText, InvalidUtf8IsMalformed) {
  try {
    extract_text("abc\xFF\xFE", SourceFormat::PlainText);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedInput);
  }
}

TEST(ExtractText, FormatForPath) {
  EXPECT_EQ(format_for_path("a.txt"), SourceFormat::PlainText);
  EXPECT_EQ(format_for_path("dir/A.MD"), SourceFormat::Markdown);
  EXPECT_EQ(format_for_path("x.pdf"), SourceFormat::Pdf);
  try {
    format_for_path("x.docx");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedFormat);
  }
}

TEST(ExtractText, MarkdownDropsPresentationSyntax) {
  auto doc = extract_text("# Lab 3\n\n1. Explain **recursion** using `fib`.\n2. See [notes](http://x).\n", SourceFormat::Markdown);
  EXPECT_EQ(doc.raw_text, "Lab 3\n\n1. Explain recursion using fib.\n2. See notes.\n");
  auto qs = segment_questions(doc);
  EXPECT_EQ(texts(qs), (std::vector<std::string>{"Explain recursion using fib.", "See notes."}));
}

TEST(ExtractText, TwoPagePdfKeepsPageOrder) {
  for (bool flate : {false, true}) {
    auto pdf = bgtest::make_pdf({"Part A", "Part B"}, flate);
    auto doc = extract_text(pdf, SourceFormat::Pdf);
    auto a = doc.raw_text.find("Part A");
    auto b = doc.raw_text.find("Part B");
    ASSERT_NE(a, std::string::npos) << doc.raw_text;
    ASSERT_NE(b, std::string::npos) << doc.raw_text;
    EXPECT_LT(a, b);
    EXPECT_EQ(doc.raw_text, "Part A\n\nPart B\n");
    EXPECT_EQ(doc.raw_text.find('\f'), std::string::npos);
  }
}

TEST(ExtractText, PdfLinesAndEscapes) {
  auto pdf = bgtest::make_pdf({"Q1. Define TCP (briefly).\nQ2. Compare A and B.", "Q3. Design a cache."}, true);
  auto doc = extract_text(pdf, SourceFormat::Pdf);
  auto qs = segment_questions(doc);
  EXPECT_EQ(texts(qs), (std::vector<std::string>{"Define TCP (briefly).", "Compare A and B.", "Design a cache."}));
}

TEST(ExtractText, GarbagePdfIsMalformed) {
  try {
    extract_text("%PDF-1.4\nthis is not a pdf body", SourceFormat::Pdf);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::MalformedInput || e.code() == ErrorCode::EmptyDocument) << e.what();
  }
  try {
    extract_text("hello", SourceFormat::Pdf);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedInput);
  }
}

TEST(Segment, NumberedMarkers) {
  auto doc = extract_text("Q1. Define TCP.\nQ2. Design a novel congestion controller.", SourceFormat::PlainText);
  auto qs = segment_questions(doc);
  ASSERT_EQ(qs.size(), 2u);
  EXPECT_EQ(qs[0].text, "Define TCP.");
  EXPECT_EQ(qs[1].text, "Design a novel congestion controller.");
  EXPECT_EQ(qs[0].detected_marker, "Q1.");
  EXPECT_EQ(qs[1].detected_marker, "Q2.");
  expect_span_invariants(doc, qs);
}

TEST(Segment, FallbackWholeDocument) {
  auto doc = extract_text("Explain the concept of deadlock.", SourceFormat::PlainText);
  auto qs = segment_questions(doc);
  ASSERT_EQ(qs.size(), 1u);
  EXPECT_EQ(qs[0].text, "Explain the concept of deadlock.");
  EXPECT_FALSE(qs[0].detected_marker.has_value());
  expect_span_invariants(doc, qs);
}

TEST(Segment, InterrogativeLines) {
  auto doc = extract_text("What is a mutex?\nWhat is a semaphore?", SourceFormat::PlainText);
  auto qs = segment_questions(doc);
  EXPECT_EQ(texts(qs), (std::vector<std::string>{"What is a mutex?", "What is a semaphore?"}));
  expect_span_invariants(doc, qs);
}

TEST(Segment, MarkerVariants) {
  std::string src =
      "Assignment 2 brief\n"
      "Read everything first.\n"
      "1. First task\n"
      "continues here.\n"
      "2) Second task\n"
      "Question 3: Third\n"
      "Task 4 Fourth\n"
      "(a) Fifth\n"
      "b) Sixth\n"
      "QUESTION 7. Seventh\n";
  auto doc = extract_text(src, SourceFormat::PlainText);
  auto qs = segment_questions(doc);
  EXPECT_EQ(texts(qs), (std::vector<std::string>{"First task continues here.", "Second task", "Third", "Fourth", "Fifth",
                                                 "Sixth", "Seventh"}));
  std::vector<std::string> markers;
  for (const auto& q : qs) markers.push_back(*q.detected_marker);
  EXPECT_EQ(markers, (std::vector<std::string>{"1.", "2)", "Question 3:", "Task 4", "(a)", "b)", "QUESTION 7."}));
  expect_span_invariants(doc, qs);
}

TEST(Segment, DecimalsAndYearsAreNotMarkers) {
  auto doc = extract_text("3.5 percent of hosts fail.\n2024 was a leap year.\nWhy?", SourceFormat::PlainText);
  auto qs = segment_questions(doc);
  ASSERT_EQ(qs.size(), 1u);
  EXPECT_EQ(qs[0].text, "3.5 percent of hosts fail. 2024 was a leap year. Why?");
}

TEST(Segment, EmptyMarkerBlocksAreSkipped) {
  auto doc = extract_text("1.\n2. Real question\n", SourceFormat::PlainText);
  auto qs = segment_questions(doc);
  ASSERT_EQ(qs.size(), 1u);
  EXPECT_EQ(qs[0].text, "Real question");
  EXPECT_EQ(qs[0].index, 0u);
}

TEST(Segment, RoundTripStability) {
  std::string src = "Intro text\n\n\n\n1. Explain\tpaging.\r\n2. Compare paging\nand segmentation.\n";
  auto doc = extract_text(src, SourceFormat::PlainText);
  auto again = extract_text(doc.raw_text, SourceFormat::PlainText);
  EXPECT_EQ(doc.raw_text, again.raw_text);
  EXPECT_EQ(texts(segment_questions(doc)), texts(segment_questions(again)));
  EXPECT_EQ(segment_questions(doc), segment_questions(doc));
}

TEST(Segment, QuestionTextsAreSubsequenceOfRawText) {
  std::string src = "Preamble.\nQ1. One\n\nextra line\nQ2. Two?\nQ3. Three\n";
  auto doc = extract_text(src, SourceFormat::PlainText);
  auto qs = segment_questions(doc);
  auto norm = text::collapse_whitespace(doc.raw_text);
  std::size_t pos = 0;
  for (const auto& q : qs) {
    auto at = norm.find(q.text, pos);
    ASSERT_NE(at, std::string::npos) << q.text;
    pos = at + q.text.size();
  }
  expect_span_invariants(doc, qs);
}

TEST(Pdf, HexStringsAndTjArrays) {
  std::string content = "BT /F1 12 Tf 72 700 Td <48656C6C6F> Tj [(Wor) -20 (ld)] TJ 0 -14 Td [(Next) -300 (line)] TJ ET";
  std::string pdf =
      "%PDF-1.4\n1 0 obj << /Type /Catalog /Pages 2 0 R >> endobj\n"
      "2 0 obj << /Type /Pages /Kids [3 0 R] /Count 1 >> endobj\n"
      "3 0 obj << /Type /Page /Parent 2 0 R /Contents 4 0 R >> endobj\n"
      "4 0 obj << /Length " + std::to_string(content.size()) + " >>\nstream\n" + content + "\nendstream endobj\n"
      "trailer << /Root 1 0 R >>\n%%EOF\n";
  auto pages = pdf::extract_pages(pdf);
  ASSERT_EQ(pages.size(), 1u);
  EXPECT_EQ(pages[0], "HelloWorld\nNext line");
}

TEST(Pdf, EncryptedIsRejected) {
  std::string pdf =
      "%PDF-1.4\n1 0 obj << /Type /Catalog /Pages 2 0 R >> endobj\n"
      "2 0 obj << /Type /Pages /Kids [] /Count 0 >> endobj\n"
      "trailer << /Root 1 0 R /Encrypt 5 0 R >>\n%%EOF\n";
  try {
    pdf::extract_pages(pdf);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedInput);
  }
}
