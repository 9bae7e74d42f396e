#pragma once

// bloomgate command line.
//
//   bloomgate analyze <files...> [--format json|md|csv] [--out DIR] [--mock]
//                     [--fixed-time T] [--config F] [--transcripts]
//   bloomgate histogram <reports-dir> [--csv]
//   bloomgate lexicon check <file>
//   bloomgate serve [--config F] [--mock] [--mock-script F] [--host H] [--port P] [--store DIR]
//
// Exit codes: 0 ok, 1 I/O or input error, 2 provider failure, 3 invalid
// configuration or usage.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bloomgate/analytics.hpp"
#include "bloomgate/bloom.hpp"
#include "bloomgate/config.hpp"
#include "bloomgate/error.hpp"
#include "bloomgate/feedback.hpp"
#include "bloomgate/ingest.hpp"
#include "bloomgate/mock.hpp"
#include "bloomgate/pipeline.hpp"
#include "bloomgate/providers_http.hpp"
#include "bloomgate/semantic.hpp"
#include "bloomgate/service.hpp"
#include "bloomgate/store.hpp"

namespace bloomgate::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitProvider = 2;
inline constexpr int kExitConfig = 3;

inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::JudgeUnparseable:
      return kExitProvider;
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidLexicon:
      return kExitConfig;
    default:
      return kExitIo;
  }
}

/// `dir/a.txt` -> `dir/a.mock.json`, falling back to `dir/a.txt.mock.json`.
inline std::optional<fs::path> find_sidecar(const fs::path& input) {
  auto by_stem = input.parent_path() / (input.stem().string() + ".mock.json");
  if (fs::exists(by_stem)) return by_stem;
  auto by_name = input.parent_path() / (input.filename().string() + ".mock.json");
  if (fs::exists(by_name)) return by_name;
  return std::nullopt;
}

inline std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Providers {
  std::shared_ptr<judge::ChatTransport> chat;
  std::shared_ptr<semantic::EmbeddingProvider> embed;
};

inline Providers mock_providers(const mock::MockScript& script, const Config& cfg) {
  Providers p;
  p.chat = std::make_shared<mock::ScriptedChatTransport>(script, cfg.bloom_table);
  if (script.embed_fail) p.embed = std::make_shared<mock::FailingEmbedder>();
  else p.embed = std::make_shared<semantic::TermFrequencyEmbedder>();
  return p;
}

/// Real providers from config; an empty base_url leaves that signal off.
inline Providers http_providers(const Config& cfg) {
  Providers p;
  if (!cfg.chat.base_url.empty()) p.chat = std::make_shared<providers::HttpChatTransport>(cfg.chat.base_url, cfg.chat_token());
  if (!cfg.embed_base_url.empty()) {
    p.embed = std::make_shared<providers::HttpEmbeddingProvider>(cfg.embed_base_url, cfg.embed_token(),
                                                                 cfg.embed_timeout_ms, cfg.embed_max_retries);
  }
  return p;
}

struct AnalyzeArgs {
  std::vector<std::string> inputs;
  std::string format = "json";
  std::optional<std::string> out_dir;
  bool mock = false;
  std::optional<std::string> fixed_time;
  std::optional<std::string> config_path;
  bool transcripts = false;
};

inline std::string report_extension(const std::string& format) {
  if (format == "json") return ".report.json";
  if (format == "md" || format == "markdown") return ".report.md";
  return ".report.csv";
}

inline std::string render(const feedback::AnalysisReport& r, const std::string& format) {
  if (format == "json") return feedback::canonical_dump(feedback::to_json(r));
  if (format == "md" || format == "markdown") return feedback::render_markdown(r);
  return feedback::render_csv(r);
}

inline int run_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  Config cfg;
  std::optional<std::chrono::system_clock::time_point> fixed;
  try {
    if (a.config_path) cfg = Config::load(*a.config_path);
    if (a.fixed_time) fixed = feedback::parse_utc(*a.fixed_time);
    // Surface bad lexicon or bank paths before touching any input.
    Analyzer probe(cfg, nullptr, nullptr);
  } catch (const Error& e) {
    err << "bloomgate: " << e.what() << "\n";
    return kExitConfig;
  }

  for (const auto& in : a.inputs) {
    std::error_code ec;
    if (!fs::is_regular_file(in, ec)) {
      err << "bloomgate: cannot read input '" << in << "'\n";
      return kExitIo;
    }
    std::ifstream probe(in, std::ios::binary);
    if (!probe) {
      err << "bloomgate: cannot read input '" << in << "'\n";
      return kExitIo;
    }
  }
  if (a.out_dir) {
    std::error_code ec;
    fs::create_directories(*a.out_dir, ec);
    if (ec) {
      err << "bloomgate: cannot create output directory '" << *a.out_dir << "': " << ec.message() << "\n";
      return kExitIo;
    }
  }

  struct Result {
    int code = kExitOk;
    std::string message;
    std::optional<feedback::AnalysisReport> report;
    fs::path output;
  };
  std::vector<Result> results(a.inputs.size());
  auto limiter = std::make_shared<CallLimiter>(cfg.provider_parallelism);
  Providers shared_http;
  if (!a.mock) shared_http = http_providers(cfg);

  auto process = [&](std::size_t i) {
    Result& r = results[i];
    fs::path input = a.inputs[i];
    try {
      Providers prov = shared_http;
      if (a.mock) {
        auto sidecar = find_sidecar(input);
        prov = mock_providers(sidecar ? mock::MockScript::load(sidecar->string()) : mock::MockScript{}, cfg);
      }
      Analyzer analyzer(cfg, prov.chat, prov.embed, limiter);
      auto format = format_for_path(input.string());
      auto doc = extract_text(read_bytes(input), format);
      if (fixed) doc.ingested_at = *fixed;
      auto outcome = analyzer.analyze(doc, AnalyzeOptions{fixed});
      fs::path dir = a.out_dir ? fs::path(*a.out_dir) : input.parent_path();
      r.output = dir / (input.stem().string() + report_extension(a.format));
      store::write_atomic(r.output, render(outcome.report, a.format));
      if (a.transcripts) {
        nlohmann::json t = nlohmann::json::array();
        for (const auto& x : outcome.transcripts) t.push_back(to_json(x));
        store::write_atomic(dir / (input.stem().string() + ".transcripts.json"), feedback::canonical_dump(t));
      }
      r.report = std::move(outcome.report);
    } catch (const Error& e) {
      r.code = e.code() == ErrorCode::InvalidConfig ? kExitConfig : exit_code_for(e.code());
      r.message = e.what();
    } catch (const std::exception& e) {
      r.code = kExitIo;
      r.message = e.what();
    }
  };

  std::size_t cores = std::max(1u, std::thread::hardware_concurrency());
  std::size_t workers = std::min({a.inputs.size(), cores, cfg.provider_parallelism});
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < a.inputs.size(); i = next++) process(i);
      });
    }
  }

  int code = kExitOk;
  analytics::BandHistogram hist;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (r.report) {
      ++ok;
      hist.add(r.report->assignment_band);
      out << a.inputs[i] << "\t" << feedback::format_score(r.report->assignment_score) << "\t"
          << fusion::to_string(r.report->assignment_band) << "\t" << r.output.string() << "\n";
    } else {
      err << "bloomgate: " << a.inputs[i] << ": " << r.message << "\n";
      code = std::max(code, r.code);
    }
  }
  out << "analyzed " << results.size() << " file(s): " << ok << " ok, " << (results.size() - ok) << " failed;";
  for (auto b : fusion::kAllBands) out << " " << fusion::to_string(b) << "=" << hist.count(b);
  out << "\n";
  return code;
}

inline bool is_report_candidate(const fs::path& p) {
  auto name = p.filename().string();
  auto ends_with = [&](std::string_view s) { return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0; };
  return ends_with(".json") && !ends_with(".mock.json") && !ends_with(".transcripts.json");
}

inline int run_histogram(const std::string& dir, bool csv, std::ostream& out, std::ostream& err) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    err << "bloomgate: '" << dir << "' is not a directory\n";
    return kExitIo;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (e.is_regular_file() && is_report_candidate(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<double> scores;
  for (const auto& f : files) {
    try {
      auto report = feedback::report_from_json(nlohmann::json::parse(read_bytes(f)));
      scores.push_back(report.assignment_score);
    } catch (const std::exception& e) {
      err << "bloomgate: warning: skipping " << f.string() << ": " << e.what() << "\n";
    }
  }
  try {
    auto h = analytics::histogram(scores);
    out << (csv ? analytics::to_csv(h) : feedback::canonical_dump(analytics::to_json(h)));
  } catch (const Error& e) {
    err << "bloomgate: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

inline int run_lexicon_check(const std::string& path, std::ostream& out, std::ostream& err) {
  std::string content;
  try {
    content = read_bytes(path);
  } catch (const Error& e) {
    err << "bloomgate: " << e.what() << "\n";
    return kExitIo;
  }
  try {
    auto lex = bloom::VerbLexicon::parse(content);
    out << "ok: " << lex.size() << " entries, version " << lex.version() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "bloomgate: " << path << ": " << e.what() << "\n";
    return kExitConfig;
  }
}

struct ServeArgs {
  std::optional<std::string> config_path;
  bool mock = false;
  std::optional<std::string> mock_script;
  std::optional<std::string> host;
  std::optional<int> port;
  std::optional<std::string> store_path;
};

inline int run_serve(const ServeArgs& a, std::ostream& err) {
  Config cfg;
  std::shared_ptr<Analyzer> analyzer;
  std::shared_ptr<store::AnalysisStore> st;
  try {
    if (a.config_path) cfg = Config::load(*a.config_path);
    if (a.host) cfg.server_host = *a.host;
    if (a.port) cfg.server_port = *a.port;
    if (a.store_path) cfg.store_path = *a.store_path;
    cfg.validate();
    Providers prov;
    if (a.mock || a.mock_script) {
      prov = mock_providers(a.mock_script ? mock::MockScript::load(*a.mock_script) : mock::MockScript{}, cfg);
    } else {
      prov = http_providers(cfg);
    }
    analyzer = std::make_shared<Analyzer>(cfg, prov.chat, prov.embed);
    st = std::make_shared<store::AnalysisStore>(cfg.store_path);
  } catch (const Error& e) {
    err << "bloomgate: " << e.what() << "\n";
    return e.code() == ErrorCode::StorageFailure ? kExitIo : kExitConfig;
  }
  if (cfg.require_auth && env_or_empty(kApiTokenEnv).empty()) {
    err << "bloomgate: server.require_auth is on but " << kApiTokenEnv << " is not set\n";
    return kExitConfig;
  }
  httplib::Server server;
  service::Service svc(cfg, analyzer, st);
  svc.mount(server);
  err << "bloomgate: listening on http://" << cfg.server_host << ":" << cfg.server_port << " (store "
      << cfg.store_path << ")\n";
  if (!server.listen(cfg.server_host, cfg.server_port)) {
    err << "bloomgate: cannot listen on " << cfg.server_host << ":" << cfg.server_port << "\n";
    return kExitIo;
  }
  return kExitOk;
}

/// Entry point shared by the binary and the tests. `args` excludes argv[0].
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"bloomgate: AI-solvability analysis for assessments", "bloomgate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Analyze assessment files and write one report per input");
  an->add_option("files", analyze.inputs, "Input files (.txt, .md, .pdf)")->required();
  an->add_option("--format", analyze.format, "Report format")
      ->check(CLI::IsMember({"json", "md", "markdown", "csv"}));
  an->add_option("--out", analyze.out_dir, "Output directory (default: next to each input)");
  an->add_flag("--mock", analyze.mock, "Use offline providers and per-input .mock.json sidecars");
  an->add_option("--fixed-time", analyze.fixed_time, "Pin report timestamps (YYYY-MM-DDTHH:MM:SSZ)");
  an->add_option("--config", analyze.config_path, "Config file");
  an->add_flag("--transcripts", analyze.transcripts, "Also write raw judge transcripts");

  std::string hist_dir;
  bool hist_csv = false;
  auto* hi = app.add_subcommand("histogram", "Band histogram over a directory of JSON reports");
  hi->add_option("dir", hist_dir, "Directory of *.report.json files")->required();
  hi->add_flag("--csv", hist_csv, "CSV output");

  std::string lexicon_file;
  auto* lx = app.add_subcommand("lexicon", "Lexicon utilities");
  lx->require_subcommand(1);
  auto* lc = lx->add_subcommand("check", "Validate a lexicon file");
  lc->add_option("file", lexicon_file, "Lexicon TSV")->required();

  ServeArgs serve;
  auto* sv = app.add_subcommand("serve", "Run the HTTP API");
  sv->add_option("--config", serve.config_path, "Config file");
  sv->add_flag("--mock", serve.mock, "Use offline providers");
  sv->add_option("--mock-script", serve.mock_script, "Mock script JSON (implies --mock)");
  sv->add_option("--host", serve.host, "Bind address");
  sv->add_option("--port", serve.port, "Port");
  sv->add_option("--store", serve.store_path, "Store directory");

  std::vector<std::string> argv_store;
  argv_store.push_back("bloomgate");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  if (an->parsed()) return run_analyze(analyze, out, err);
  if (hi->parsed()) return run_histogram(hist_dir, hist_csv, out, err);
  if (lc->parsed()) return run_lexicon_check(lexicon_file, out, err);
  if (sv->parsed()) return run_serve(serve, err);
  return kExitConfig;
}

}  // namespace bloomgate::cli
