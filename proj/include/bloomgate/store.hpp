#pragma once

// Directory store:
//
//   <root>/index.json            {"records": {"<id>": "records/<id>.json", ...}}
//   <root>/records/<id>.json     canonical JSON of one AnalysisRecord
//
// Records are immutable once written. Writes go to a temp file and are
// renamed into place; the index is rewritten the same way after each put.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bloomgate/analytics.hpp"
#include "bloomgate/error.hpp"
#include "bloomgate/feedback.hpp"
#include "bloomgate/ingest.hpp"
#include "bloomgate/pipeline.hpp"

namespace bloomgate::store {

namespace fs = std::filesystem;
using nlohmann::json;

/// The source text a report was computed from; kept so rescore can splice it.
struct StoredDocument {
  std::string id;
  std::string title;
  SourceFormat source_format = SourceFormat::PlainText;
  std::string raw_text;
  std::string ingested_at;
  bool operator==(const StoredDocument&) const = default;
};

inline StoredDocument stored_document(const AssessmentDocument& d) {
  return {d.id, d.title, d.source_format, d.raw_text, feedback::format_utc(d.ingested_at)};
}

inline AssessmentDocument to_document(const StoredDocument& d) {
  AssessmentDocument out;
  out.id = d.id;
  out.title = d.title;
  out.source_format = d.source_format;
  out.raw_text = d.raw_text;
  out.ingested_at = d.ingested_at.empty() ? std::chrono::system_clock::time_point{} : feedback::parse_utc(d.ingested_at);
  return out;
}

struct AnalysisRecord {
  std::string analysis_id;
  feedback::AnalysisReport report;
  StoredDocument document;
  std::vector<Transcript> raw_judge_transcripts;
  std::optional<std::string> parent_id;
  std::string created_at;
  bool operator==(const AnalysisRecord&) const = default;
};

struct RecordSummary {
  std::string analysis_id;
  std::string title;
  std::string created_at;
  double assignment_score = 0.0;
  fusion::Band assignment_band = fusion::Band::Low;
  std::size_t question_count = 0;
  std::optional<std::string> parent_id;
};

struct ListFilter {
  std::optional<fusion::Band> band;
  std::optional<std::string> since;  // inclusive, "YYYY-MM-DDTHH:MM:SSZ" (prefixes allowed)
  std::optional<std::string> until;  // inclusive
};

inline json to_json(const StoredDocument& d) {
  return {{"id", d.id},
          {"title", d.title},
          {"source_format", to_string(d.source_format)},
          {"raw_text", d.raw_text},
          {"ingested_at", d.ingested_at}};
}

inline json to_json(const AnalysisRecord& r) {
  json transcripts = json::array();
  for (const auto& t : r.raw_judge_transcripts) transcripts.push_back(bloomgate::to_json(t));
  return {{"analysis_id", r.analysis_id},
          {"parent_id", r.parent_id ? json(*r.parent_id) : json(nullptr)},
          {"created_at", r.created_at},
          {"report", feedback::to_json(r.report)},
          {"document", to_json(r.document)},
          {"raw_judge_transcripts", transcripts}};
}

inline AnalysisRecord record_from_json(const json& j) {
  try {
    AnalysisRecord r;
    r.analysis_id = j.at("analysis_id").get<std::string>();
    if (!j.at("parent_id").is_null()) r.parent_id = j["parent_id"].get<std::string>();
    r.created_at = j.at("created_at").get<std::string>();
    r.report = feedback::report_from_json(j.at("report"));
    const auto& d = j.at("document");
    r.document = {d.at("id").get<std::string>(), d.at("title").get<std::string>(),
                  source_format_from_string(d.at("source_format").get<std::string>()),
                  d.at("raw_text").get<std::string>(), d.value("ingested_at", std::string())};
    for (const auto& t : j.at("raw_judge_transcripts")) r.raw_judge_transcripts.push_back(transcript_from_json(t));
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, std::string("analysis record: ") + e.what());
  }
}

inline json to_json(const RecordSummary& s) {
  return {{"analysis_id", s.analysis_id},
          {"title", s.title},
          {"created_at", s.created_at},
          {"assignment_score", s.assignment_score},
          {"assignment_band", fusion::to_string(s.assignment_band)},
          {"question_count", s.question_count},
          {"parent_id", s.parent_id ? json(*s.parent_id) : json(nullptr)}};
}

inline RecordSummary summarize(const AnalysisRecord& r) {
  return {r.analysis_id,           r.report.title,          r.created_at, r.report.assignment_score,
          r.report.assignment_band, r.report.questions.size(), r.parent_id};
}

/// Writes `content` to `path` via a sibling temp file and rename.
inline void write_atomic(const fs::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::StorageFailure, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::StorageFailure, "cannot rename into " + path.string());
  }
}

inline std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::StorageFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Single writer, many readers. Records are cached in memory after load.
class AnalysisStore {
 public:
  explicit AnalysisStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_ / "records", ec);
    if (ec) throw Error(ErrorCode::StorageFailure, "cannot create store at " + root_.string() + ": " + ec.message());
    load();
  }

  const fs::path& root() const { return root_; }

  /// Reserves a fresh id ("an-000001", ...).
  std::string allocate_id() {
    std::unique_lock lock(mu_);
    return format_id(++last_seq_);
  }

  std::string put(const AnalysisRecord& record) {
    if (record.analysis_id.empty()) throw Error(ErrorCode::InvalidArgument, "record has no analysis_id");
    if (record.analysis_id.find_first_of("/\\.") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "analysis_id contains path characters");
    }
    std::unique_lock lock(mu_);
    if (records_.count(record.analysis_id)) throw Error(ErrorCode::DuplicateId, record.analysis_id);
    if (record.parent_id && !records_.count(*record.parent_id)) {
      throw Error(ErrorCode::NotFound, "parent analysis '" + *record.parent_id + "' does not exist");
    }
    auto rel = "records/" + record.analysis_id + ".json";
    write_atomic(root_ / rel, feedback::canonical_dump(to_json(record)));
    records_.emplace(record.analysis_id, record);
    files_[record.analysis_id] = rel;
    if (auto seq = parse_seq(record.analysis_id)) last_seq_ = std::max(last_seq_, *seq);
    write_index();
    return record.analysis_id;
  }

  AnalysisRecord get(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = records_.find(id);
    if (it == records_.end()) throw Error(ErrorCode::NotFound, "analysis '" + id + "' not found");
    return it->second;
  }

  bool contains(const std::string& id) const {
    std::shared_lock lock(mu_);
    return records_.count(id) != 0;
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return records_.size();
  }

  /// Summaries ordered by id.
  std::vector<RecordSummary> list(const ListFilter& filter = {}) const {
    std::shared_lock lock(mu_);
    std::vector<RecordSummary> out;
    for (const auto& [id, r] : records_) {
      if (filter.band && r.report.assignment_band != *filter.band) continue;
      if (filter.since && r.created_at < *filter.since) continue;
      if (filter.until && r.created_at.substr(0, filter.until->size()) > *filter.until) continue;
      out.push_back(summarize(r));
    }
    return out;
  }

  /// Root first, ending with `id` itself.
  std::vector<RecordSummary> lineage(const std::string& id) const {
    std::shared_lock lock(mu_);
    std::vector<RecordSummary> chain;
    std::optional<std::string> cur = id;
    while (cur) {
      auto it = records_.find(*cur);
      if (it == records_.end()) throw Error(ErrorCode::NotFound, "analysis '" + *cur + "' not found");
      chain.push_back(summarize(it->second));
      cur = it->second.parent_id;
      if (chain.size() > records_.size()) throw Error(ErrorCode::StorageFailure, "lineage cycle at '" + id + "'");
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
  }

  std::vector<double> assignment_scores() const {
    std::shared_lock lock(mu_);
    std::vector<double> out;
    for (const auto& [id, r] : records_) out.push_back(r.report.assignment_score);
    return out;
  }

 private:
  static std::string format_id(std::size_t seq) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "an-%06zu", seq);
    return buf;
  }

  static std::optional<std::size_t> parse_seq(const std::string& id) {
    if (id.rfind("an-", 0) != 0 || id.size() < 4) return std::nullopt;
    std::size_t v = 0;
    for (std::size_t i = 3; i < id.size(); ++i) {
      if (id[i] < '0' || id[i] > '9') return std::nullopt;
      v = v * 10 + static_cast<std::size_t>(id[i] - '0');
    }
    return v;
  }

  void load() {
    auto index_path = root_ / "index.json";
    if (!fs::exists(index_path)) return;
    json index;
    try {
      index = json::parse(read_all(index_path));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::StorageFailure, "corrupt store index: " + std::string(e.what()));
    }
    const json records = index.value("records", json::object());
    for (const auto& [id, rel] : records.items()) {
      auto rec = record_from_json(json::parse(read_all(root_ / rel.get<std::string>())));
      records_.emplace(id, std::move(rec));
      files_[id] = rel.get<std::string>();
      if (auto seq = parse_seq(id)) last_seq_ = std::max(last_seq_, *seq);
    }
  }

  void write_index() {
    json files = json::object();
    for (const auto& [id, rel] : files_) files[id] = rel;
    write_atomic(root_ / "index.json", feedback::canonical_dump({{"records", files}}));
  }

  fs::path root_;
  mutable std::shared_mutex mu_;
  std::map<std::string, AnalysisRecord> records_;
  std::map<std::string, std::string> files_;
  std::size_t last_seq_ = 0;
};

}  // namespace bloomgate::store
