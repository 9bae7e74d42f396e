#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "bloomgate/error.hpp"
#include "bloomgate/pdf.hpp"
#include "bloomgate/text.hpp"

namespace bloomgate {

enum class SourceFormat { PlainText, Markdown, Pdf };

constexpr std::string_view to_string(SourceFormat f) {
  switch (f) {
    case SourceFormat::PlainText: return "PlainText";
    case SourceFormat::Markdown: return "Markdown";
    case SourceFormat::Pdf: return "Pdf";
  }
  return "PlainText";
}

inline SourceFormat source_format_from_string(std::string_view s) {
  if (s == "PlainText") return SourceFormat::PlainText;
  if (s == "Markdown") return SourceFormat::Markdown;
  if (s == "Pdf") return SourceFormat::Pdf;
  throw Error(ErrorCode::UnsupportedFormat, "unknown source format '" + std::string(s) + "'");
}

/// Maps a file name to a format by extension (.txt, .md/.markdown, .pdf).
inline SourceFormat format_for_path(std::string_view path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string_view::npos ? "" : text::lowercase(path.substr(dot + 1));
  if (ext == "txt" || ext == "text") return SourceFormat::PlainText;
  if (ext == "md" || ext == "markdown") return SourceFormat::Markdown;
  if (ext == "pdf") return SourceFormat::Pdf;
  throw Error(ErrorCode::UnsupportedFormat, "unsupported file extension '." + ext + "'");
}

struct AssessmentDocument {
  std::string id;
  std::string title;
  SourceFormat source_format = SourceFormat::PlainText;
  std::string raw_text;
  std::chrono::system_clock::time_point ingested_at{};
};

struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const CharSpan&) const = default;
};

struct Question {
  std::size_t index = 0;
  std::string text;
  CharSpan char_span;
  std::optional<std::string> detected_marker;
  bool operator==(const Question&) const = default;
};

/// Canonical text form: BOM stripped, CRLF/CR to LF, tabs to a single space,
/// and runs of more than two blank lines collapsed to two. Idempotent.
inline std::string normalize_text(std::string_view in) {
  if (in.substr(0, 3) == "\xEF\xBB\xBF") in.remove_prefix(3);
  std::string lf;
  lf.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    char c = in[i];
    if (c == '\r') {
      lf.push_back('\n');
      if (i + 1 < in.size() && in[i + 1] == '\n') ++i;
    } else if (c == '\t') {
      lf.push_back(' ');
    } else {
      lf.push_back(c);
    }
  }
  // A blank line is one containing only spaces; keep at most two in a row.
  std::string out;
  out.reserve(lf.size());
  int blank_run = 0;
  std::size_t pos = 0;
  while (pos < lf.size()) {
    auto nl = lf.find('\n', pos);
    bool has_nl = nl != std::string::npos;
    std::string_view line(lf.data() + pos, (has_nl ? nl : lf.size()) - pos);
    bool blank = text::trim(line).empty() && has_nl;
    if (blank) {
      if (++blank_run > 2) {
        pos = nl + 1;
        continue;
      }
    } else {
      blank_run = 0;
    }
    out.append(line);
    if (has_nl) out.push_back('\n');
    pos = has_nl ? nl + 1 : lf.size();
  }
  return out;
}

namespace detail {

/// Drops Markdown presentation syntax that would otherwise hide line-start
/// numbering markers: heading hashes, emphasis runs, inline code ticks and
/// link targets.
inline std::string strip_markdown(std::string_view md) {
  static const std::regex heading(R"(^\s{0,3}#{1,6}\s+)");
  static const std::regex emphasis(R"(\*\*|__|`)");
  static const std::regex link(R"(\[([^\]]*)\]\([^)]*\))");
  std::string out;
  for (auto line : text::split_lines(md)) {
    std::string l(line);
    l = std::regex_replace(l, heading, "");
    l = std::regex_replace(l, link, "$1");
    l = std::regex_replace(l, emphasis, "");
    out += l;
    out.push_back('\n');
  }
  return out;
}

}  // namespace detail

/// Turns raw bytes into a normalized AssessmentDocument.
inline AssessmentDocument extract_text(std::string_view input, SourceFormat format, std::string title = {}) {
  if (format != SourceFormat::PlainText && format != SourceFormat::Markdown && format != SourceFormat::Pdf) {
    throw Error(ErrorCode::UnsupportedFormat, "format outside the supported set");
  }
  if (input.empty()) throw Error(ErrorCode::EmptyDocument, "input stream is empty");

  std::string body;
  if (format == SourceFormat::Pdf) {
    auto pages = pdf::extract_pages(input);
    std::vector<std::string> nonempty;
    for (auto& p : pages) {
      if (!text::trim(p).empty()) nonempty.push_back(std::move(p));
    }
    body = text::join(nonempty, "\n\n");
    body.push_back('\n');
    if (!text::is_valid_utf8(body)) throw Error(ErrorCode::MalformedInput, "PDF text is not valid UTF-8");
  } else {
    if (!text::is_valid_utf8(input)) throw Error(ErrorCode::MalformedInput, "input is not valid UTF-8");
    body = std::string(input);
    if (format == SourceFormat::Markdown) {
      std::string lf = normalize_text(body);
      body = detail::strip_markdown(lf);
      if (!lf.empty() && lf.back() != '\n') body.pop_back();
    }
  }

  AssessmentDocument doc;
  doc.raw_text = normalize_text(body);
  if (text::trim(doc.raw_text).empty()) throw Error(ErrorCode::EmptyDocument, "no extractable text");
  doc.source_format = format;
  doc.id = "doc-" + text::sha256_hex(doc.raw_text).substr(0, 16);
  doc.title = title.empty() ? std::string(text::trim(text::split_lines(doc.raw_text).front())) : std::move(title);
  if (doc.title.empty()) doc.title = doc.id;
  doc.ingested_at = std::chrono::system_clock::now();
  return doc;
}

namespace detail {

struct MarkerHit {
  std::size_t line_start;    // offset of the line in raw_text
  std::size_t marker_begin;  // offset of the marker token
  std::size_t marker_end;    // offset just past the marker token
};

/// Line-start numbering markers: "1." "1)" "Q1" "Q1." "Question 1:" "Task 2" "(a)" "a)".
inline std::optional<std::pair<std::size_t, std::size_t>> match_marker(std::string_view line) {
  static const std::regex marker(
      R"(^[ ]*((?:[Qq](?:uestion)?[ ]*\d{1,3}|QUESTION[ ]+\d{1,3}|[Tt]ask[ ]+\d{1,3}|TASK[ ]+\d{1,3})[.:)]?|\d{1,3}[.)]|\([a-z]\)|[a-z]\))(?:[ ]+|$))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(line.begin(), line.end(), m, marker)) return std::nullopt;
  auto begin = static_cast<std::size_t>(m.position(1));
  return std::pair(begin, begin + static_cast<std::size_t>(m.length(1)));
}

inline Question make_question(std::string_view raw, std::size_t begin, std::size_t end,
                              std::optional<std::string> marker) {
  while (begin < end && text::is_space(raw[begin])) ++begin;
  while (end > begin && text::is_space(raw[end - 1])) --end;
  Question q;
  q.char_span = {begin, end};
  q.text = text::collapse_whitespace(raw.substr(begin, end - begin));
  q.detected_marker = std::move(marker);
  return q;
}

}  // namespace detail

/// Splits a document into questions: numbering markers first, then lines
/// ending in '?', then the whole document as one question.
inline std::vector<Question> segment_questions(const AssessmentDocument& doc) {
  std::string_view raw = doc.raw_text;
  if (text::trim(raw).empty()) throw Error(ErrorCode::EmptyDocument, "document text is empty");

  struct Line {
    std::size_t start;
    std::string_view text;
  };
  std::vector<Line> lines;
  {
    std::size_t pos = 0;
    while (pos < raw.size()) {
      auto nl = raw.find('\n', pos);
      std::size_t end = nl == std::string_view::npos ? raw.size() : nl;
      lines.push_back({pos, raw.substr(pos, end - pos)});
      pos = end + 1;
    }
  }

  std::vector<Question> out;

  // Tier 1: numbering markers.
  std::vector<detail::MarkerHit> hits;
  for (const auto& l : lines) {
    if (auto m = detail::match_marker(l.text)) {
      hits.push_back({l.start, l.start + m->first, l.start + m->second});
    }
  }
  if (!hits.empty()) {
    for (std::size_t i = 0; i < hits.size(); ++i) {
      std::size_t end = i + 1 < hits.size() ? hits[i + 1].line_start : raw.size();
      std::string marker(raw.substr(hits[i].marker_begin, hits[i].marker_end - hits[i].marker_begin));
      auto q = detail::make_question(raw, hits[i].marker_end, end, marker);
      if (!q.text.empty()) out.push_back(std::move(q));
    }
  }

  // Tier 2: interrogative lines. Each question is the paragraph run of
  // non-blank lines ending at a line whose last character is '?'.
  if (out.empty()) {
    std::optional<std::size_t> block_start;
    for (const auto& l : lines) {
      auto t = text::trim(l.text);
      if (t.empty()) {
        block_start.reset();
        continue;
      }
      if (!block_start) block_start = l.start;
      if (t.back() == '?') {
        auto q = detail::make_question(raw, *block_start, l.start + l.text.size(), std::nullopt);
        if (!q.text.empty()) out.push_back(std::move(q));
        block_start.reset();
      }
    }
  }

  // Tier 3: the whole document.
  if (out.empty()) out.push_back(detail::make_question(raw, 0, raw.size(), std::nullopt));

  for (std::size_t i = 0; i < out.size(); ++i) out[i].index = i;
  return out;
}

}  // namespace bloomgate
