#pragma once

// HTTP API.
//
//   POST /analyses                  multipart "file" (+ optional "title") or JSON {title, text[, format]}
//                                   201 {analysis_id, parent_id, report} or 202 {analysis_id, status, poll_url}
//   GET  /analyses                  {analyses: [summary...]}   ?band=&since=&until=
//   GET  /analyses/{id}             200 {analysis_id, parent_id, report}; 202 while pending
//   GET  /analyses/{id}/lineage     {analysis_id, lineage: [summary...]} root first
//   POST /analyses/{id}/rescore     {question_index, new_text} -> 201 {..., delta}
//   GET  /corpus/histogram          {counts: {...}, total}
//
// Error bodies: {code: BadRequest|NotFound|ProviderUnavailable|Internal, message, detail}.

#include <httplib.h>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bloomgate/analytics.hpp"
#include "bloomgate/config.hpp"
#include "bloomgate/error.hpp"
#include "bloomgate/feedback.hpp"
#include "bloomgate/ingest.hpp"
#include "bloomgate/pipeline.hpp"
#include "bloomgate/store.hpp"
#include "bloomgate/text.hpp"

namespace bloomgate::service {

using nlohmann::json;

enum class ApiCode { BadRequest, NotFound, ProviderUnavailable, Internal };

constexpr std::string_view to_string(ApiCode c) {
  switch (c) {
    case ApiCode::BadRequest: return "BadRequest";
    case ApiCode::NotFound: return "NotFound";
    case ApiCode::ProviderUnavailable: return "ProviderUnavailable";
    case ApiCode::Internal: return "Internal";
  }
  return "Internal";
}

struct ApiError {
  int status = 500;
  ApiCode code = ApiCode::Internal;
  std::string message;
  json detail = nullptr;
};

inline json to_json(const ApiError& e) {
  return {{"code", to_string(e.code)}, {"message", e.message}, {"detail", e.detail}};
}

/// Every pipeline error code maps to exactly one status and API code.
inline ApiError api_error_for(const Error& e) {
  ApiError out;
  out.message = e.what();
  out.detail = {{"error", to_string(e.code())}};
  switch (e.code()) {
    case ErrorCode::EmptyDocument:
    case ErrorCode::EmptyAnalysis:
    case ErrorCode::EmptyQuestion:
      out.status = 422;
      out.code = ApiCode::BadRequest;
      break;
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::MalformedInput:
    case ErrorCode::InvalidArgument:
    case ErrorCode::OutOfRange:
    case ErrorCode::EmptyList:
      out.status = 400;
      out.code = ApiCode::BadRequest;
      break;
    case ErrorCode::NotFound:
      out.status = 404;
      out.code = ApiCode::NotFound;
      break;
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::JudgeUnparseable:
      out.status = 503;
      out.code = ApiCode::ProviderUnavailable;
      break;
    default:
      out.status = 500;
      out.code = ApiCode::Internal;
      break;
  }
  return out;
}

inline ApiError bad_request(std::string message, int status = 400) {
  return {status, ApiCode::BadRequest, std::move(message), nullptr};
}

struct RescoreDelta {
  std::size_t question_index = 0;
  double old_score = 0.0;
  double new_score = 0.0;
  fusion::Band old_band = fusion::Band::Low;
  fusion::Band new_band = fusion::Band::Low;
};

inline json to_json(const RescoreDelta& d) {
  return {{"question_index", d.question_index},
          {"old_score", d.old_score},
          {"new_score", d.new_score},
          {"old_band", fusion::to_string(d.old_band)},
          {"new_band", fusion::to_string(d.new_band)}};
}

/// Substitutes question `index` and re-derives the spans of later questions.
inline std::pair<AssessmentDocument, std::vector<Question>> splice_question(const store::AnalysisRecord& parent,
                                                                            std::size_t index,
                                                                            const std::string& new_text) {
  const auto& rows = parent.report.questions;
  if (index >= rows.size()) {
    throw Error(ErrorCode::InvalidArgument, "question_index " + std::to_string(index) + " out of range (0.." +
                                                std::to_string(rows.size() - 1) + ")");
  }
  auto replacement = text::collapse_whitespace(new_text);
  if (replacement.empty()) throw Error(ErrorCode::InvalidArgument, "new_text is empty");
  if (!text::is_valid_utf8(replacement)) throw Error(ErrorCode::MalformedInput, "new_text is not valid UTF-8");

  const auto& raw = parent.document.raw_text;
  const auto span = rows[index].char_span;
  if (span.start > span.end || span.end > raw.size()) {
    throw Error(ErrorCode::MalformedInput, "stored span is outside the document");
  }
  auto doc = store::to_document(parent.document);
  doc.raw_text = raw.substr(0, span.start) + replacement + raw.substr(span.end);
  doc.id = "doc-" + text::sha256_hex(doc.raw_text).substr(0, 16);
  doc.ingested_at = std::chrono::system_clock::now();

  const auto old_len = static_cast<std::ptrdiff_t>(span.end - span.start);
  const auto shift = static_cast<std::ptrdiff_t>(replacement.size()) - old_len;
  std::vector<Question> questions;
  for (const auto& row : rows) {
    Question q;
    q.index = row.index;
    q.detected_marker = row.marker;
    q.text = row.text;
    q.char_span = row.char_span;
    if (row.index == index) {
      q.text = replacement;
      q.char_span.end = span.start + replacement.size();
    } else if (row.char_span.start >= span.end) {
      q.char_span.start = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(row.char_span.start) + shift);
      q.char_span.end = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(row.char_span.end) + shift);
    }
    questions.push_back(std::move(q));
  }
  return {std::move(doc), std::move(questions)};
}

class Service {
 public:
  Service(Config cfg, std::shared_ptr<Analyzer> analyzer, std::shared_ptr<store::AnalysisStore> store)
      : cfg_(std::move(cfg)), analyzer_(std::move(analyzer)), store_(std::move(store)) {
    worker_ = std::thread([this] { run_jobs(); });
  }

  ~Service() {
    {
      std::lock_guard lock(jobs_mu_);
      stopping_ = true;
    }
    jobs_cv_.notify_all();
    if (worker_.joinable()) worker_.join();
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Test hook: pins created_at on every new report.
  void set_clock(std::function<std::chrono::system_clock::time_point()> clock) { clock_ = std::move(clock); }

  void mount(httplib::Server& server) {
    server.set_payload_max_length(cfg_.max_body_bytes);

    server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      add_cors(res);
      if (req.method == "OPTIONS") {
        res.status = 204;
        return httplib::Server::HandlerResponse::Handled;
      }
      if (cfg_.require_auth && !authorized(req)) {
        send_error(res, {401, ApiCode::BadRequest, "missing or invalid bearer token", nullptr});
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });

    server.set_error_handler([this](const httplib::Request&, httplib::Response& res) {
      add_cors(res);
      if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
      ApiError e;
      e.status = res.status;
      if (res.status == 404) {
        e.code = ApiCode::NotFound;
        e.message = "no such route";
      } else if (res.status == 413) {
        e.code = ApiCode::BadRequest;
        e.message = "request body exceeds " + std::to_string(cfg_.max_body_bytes) + " bytes";
      } else if (res.status < 500) {
        e.code = ApiCode::BadRequest;
        e.message = httplib::status_message(res.status);
      } else {
        e.message = httplib::status_message(res.status);
      }
      res.set_content(feedback::canonical_dump(to_json(e)), "application/json");
      return httplib::Server::HandlerResponse::Handled;
    });

    server.set_exception_handler([this](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const Error& e) {
        send_error(res, api_error_for(e));
      } catch (const std::exception& e) {
        send_error(res, {500, ApiCode::Internal, e.what(), nullptr});
      } catch (...) {
        send_error(res, {500, ApiCode::Internal, "unknown error", nullptr});
      }
    });

    server.Post("/analyses", [this](const httplib::Request& req, httplib::Response& res) { post_analysis(req, res); });
    server.Get("/analyses", [this](const httplib::Request& req, httplib::Response& res) { list_analyses(req, res); });
    server.Get(R"(/analyses/([A-Za-z0-9_-]+))",
               [this](const httplib::Request& req, httplib::Response& res) { get_analysis(req.matches[1], res); });
    server.Get(R"(/analyses/([A-Za-z0-9_-]+)/lineage)",
               [this](const httplib::Request& req, httplib::Response& res) { get_lineage(req.matches[1], res); });
    server.Post(R"(/analyses/([A-Za-z0-9_-]+)/rescore)", [this](const httplib::Request& req, httplib::Response& res) {
      rescore(req.matches[1], req, res);
    });
    server.Get("/corpus/histogram", [this](const httplib::Request&, httplib::Response& res) {
      auto h = analytics::histogram(store_->assignment_scores(), cfg_.thresholds);
      send_json(res, 200, analytics::to_json(h));
    });
  }

  /// Blocks until every queued async analysis has finished.
  void drain() {
    std::unique_lock lock(jobs_mu_);
    jobs_cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
  }

 private:
  struct Job {
    std::string analysis_id;
    AssessmentDocument doc;
    std::vector<Question> questions;
  };

  enum class JobState { Pending, Failed };
  struct JobStatus {
    JobState state = JobState::Pending;
    ApiError error;
  };

  void add_cors(httplib::Response& res) const {
    if (cfg_.cors_origin.empty()) return;
    res.set_header("Access-Control-Allow-Origin", cfg_.cors_origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
    res.set_header("Vary", "Origin");
  }

  bool authorized(const httplib::Request& req) const {
    auto token = env_or_empty(kApiTokenEnv);
    if (token.empty()) return false;
    return req.get_header_value("Authorization") == "Bearer " + token;
  }

  static void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(feedback::canonical_dump(body), "application/json");
  }

  static void send_error(httplib::Response& res, const ApiError& e) { send_json(res, e.status, to_json(e)); }

  std::chrono::system_clock::time_point now() const {
    return clock_ ? clock_() : std::chrono::system_clock::now();
  }

  static json record_body(const store::AnalysisRecord& r) {
    return {{"analysis_id", r.analysis_id},
            {"parent_id", r.parent_id ? json(*r.parent_id) : json(nullptr)},
            {"report", feedback::to_json(r.report)}};
  }

  static std::string poll_url(const std::string& id) { return "/analyses/" + id; }

  store::AnalysisRecord run_and_store(const std::string& id, const AssessmentDocument& doc,
                                      const std::vector<Question>& questions,
                                      std::optional<std::string> parent_id = std::nullopt) {
    auto created = now();
    auto outcome = analyzer_->analyze(doc, questions, {created});
    store::AnalysisRecord rec;
    rec.analysis_id = id;
    rec.report = std::move(outcome.report);
    rec.document = store::stored_document(doc);
    rec.raw_judge_transcripts = std::move(outcome.transcripts);
    rec.parent_id = std::move(parent_id);
    rec.created_at = rec.report.created_at;
    store_->put(rec);
    return rec;
  }

  AssessmentDocument read_upload(const httplib::Request& req) const {
    if (req.is_multipart_form_data()) {
      if (!req.has_file("file")) throw Error(ErrorCode::InvalidArgument, "multipart upload needs a 'file' part");
      auto file = req.get_file_value("file");
      auto format = format_for_path(file.filename.empty() ? std::string("upload.txt") : file.filename);
      std::string title = req.has_file("title") ? req.get_file_value("title").content : std::string();
      return extract_text(file.content, format, title);
    }
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::MalformedInput, std::string("request body is not JSON: ") + e.what());
    }
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
      throw Error(ErrorCode::InvalidArgument, "JSON body needs a string 'text' field");
    }
    auto format = SourceFormat::PlainText;
    if (body.contains("format")) {
      auto f = body["format"].get<std::string>();
      if (f == "txt" || f == "text" || f == "plain") format = SourceFormat::PlainText;
      else if (f == "md" || f == "markdown") format = SourceFormat::Markdown;
      else format = source_format_from_string(f);
      if (format == SourceFormat::Pdf) throw Error(ErrorCode::UnsupportedFormat, "PDF must be uploaded as a multipart file");
    }
    auto title = body.value("title", std::string());
    return extract_text(body["text"].get<std::string>(), format, title);
  }

  void post_analysis(const httplib::Request& req, httplib::Response& res) {
    auto doc = read_upload(req);
    auto questions = segment_questions(doc);
    if (questions.empty()) throw Error(ErrorCode::EmptyAnalysis, "document has no questions");
    auto id = store_->allocate_id();
    if (questions.size() > cfg_.max_questions_sync) {
      {
        std::lock_guard lock(jobs_mu_);
        status_[id] = {};
        queue_.push_back({id, std::move(doc), std::move(questions)});
      }
      jobs_cv_.notify_all();
      send_json(res, 202, {{"analysis_id", id}, {"status", "pending"}, {"poll_url", poll_url(id)}});
      return;
    }
    auto rec = run_and_store(id, doc, questions);
    send_json(res, 201, record_body(rec));
  }

  void get_analysis(const std::string& id, httplib::Response& res) {
    {
      std::lock_guard lock(jobs_mu_);
      if (auto it = status_.find(id); it != status_.end()) {
        if (it->second.state == JobState::Pending) {
          send_json(res, 202, {{"analysis_id", id}, {"status", "pending"}, {"poll_url", poll_url(id)}});
        } else {
          send_error(res, it->second.error);
        }
        return;
      }
    }
    send_json(res, 200, record_body(store_->get(id)));
  }

  void list_analyses(const httplib::Request& req, httplib::Response& res) {
    store::ListFilter filter;
    if (req.has_param("band")) {
      auto b = fusion::band_from_string(req.get_param_value("band"));
      if (!b) throw Error(ErrorCode::InvalidArgument, "unknown band '" + req.get_param_value("band") + "'");
      filter.band = b;
    }
    if (req.has_param("since")) filter.since = req.get_param_value("since");
    if (req.has_param("until")) filter.until = req.get_param_value("until");
    json list = json::array();
    for (const auto& s : store_->list(filter)) list.push_back(store::to_json(s));
    send_json(res, 200, {{"analyses", list}});
  }

  void get_lineage(const std::string& id, httplib::Response& res) {
    json chain = json::array();
    for (const auto& s : store_->lineage(id)) chain.push_back(store::to_json(s));
    send_json(res, 200, {{"analysis_id", id}, {"lineage", chain}});
  }

  void rescore(const std::string& id, const httplib::Request& req, httplib::Response& res) {
    auto parent = store_->get(id);
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::MalformedInput, std::string("request body is not JSON: ") + e.what());
    }
    if (!body.is_object() || !body.contains("question_index") || !body["question_index"].is_number_integer() ||
        !body.contains("new_text") || !body["new_text"].is_string()) {
      throw Error(ErrorCode::InvalidArgument, "body needs integer 'question_index' and string 'new_text'");
    }
    auto raw_index = body["question_index"].get<long long>();
    if (raw_index < 0) throw Error(ErrorCode::InvalidArgument, "question_index must be >= 0");
    auto index = static_cast<std::size_t>(raw_index);
    auto [doc, questions] = splice_question(parent, index, body["new_text"].get<std::string>());
    auto rec = run_and_store(store_->allocate_id(), doc, questions, id);
    RescoreDelta delta{index, parent.report.questions[index].score, rec.report.questions[index].score,
                       parent.report.questions[index].band, rec.report.questions[index].band};
    auto out = record_body(rec);
    out["delta"] = to_json(delta);
    send_json(res, 201, out);
  }

  void run_jobs() {
    for (;;) {
      Job job;
      {
        std::unique_lock lock(jobs_mu_);
        jobs_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;
        job = std::move(queue_.front());
        queue_.pop_front();
        busy_ = true;
      }
      std::optional<ApiError> failure;
      try {
        run_and_store(job.analysis_id, job.doc, job.questions);
      } catch (const Error& e) {
        failure = api_error_for(e);
      } catch (const std::exception& e) {
        failure = ApiError{500, ApiCode::Internal, e.what(), nullptr};
      }
      {
        std::lock_guard lock(jobs_mu_);
        if (failure) status_[job.analysis_id] = {JobState::Failed, *failure};
        else status_.erase(job.analysis_id);
        busy_ = false;
      }
      jobs_cv_.notify_all();
    }
  }

  Config cfg_;
  std::shared_ptr<Analyzer> analyzer_;
  std::shared_ptr<store::AnalysisStore> store_;
  std::function<std::chrono::system_clock::time_point()> clock_;

  std::mutex jobs_mu_;
  std::condition_variable jobs_cv_;
  std::deque<Job> queue_;
  std::map<std::string, JobStatus> status_;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace bloomgate::service
