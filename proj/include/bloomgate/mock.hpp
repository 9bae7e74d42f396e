#pragma once

// Offline providers for --mock runs and tests.
//
// Mock script format (the per-input sidecar `<stem>.mock.json`, or the
// service's --mock-script):
//
//   {
//     "chat": {
//       "responses": { "<question text>": "AI-SOLVABILITY: 85%",
//                      "<other text>": ["!timeout", "AI-SOLVABILITY: 40%"] },
//       "holistic": "AI-SOLVABILITY: 70%",
//       "default": "AI-SOLVABILITY: 60%",
//       "fail": false
//     },
//     "embed": { "fail": false }
//   }
//
// A list scripts successive calls for that question; the last entry then
// repeats. "!timeout" and "!error" make that call fail at the transport.
// Questions without a scripted reply (and no "default") get the lexicon-echo
// reply: the solvability of the dominant Bloom level named in the prompt.

#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bloomgate/bloom.hpp"
#include "bloomgate/error.hpp"
#include "bloomgate/judge.hpp"
#include "bloomgate/semantic.hpp"

namespace bloomgate::mock {

/// Replies with the solvability of the Bloom level named in the prompt.
inline std::string lexicon_echo_reply(const std::string& user_text, const bloom::SolvabilityTable& table = {}) {
  static constexpr std::string_view kLead = "Dominant Bloom's Taxonomy level (lexicon estimate): ";
  auto pos = user_text.find(kLead);
  bloom::Level level = bloom::Level::Understand;
  if (pos != std::string::npos) {
    auto start = pos + kLead.size();
    auto end = user_text.find('\n', start);
    if (auto l = bloom::level_from_string(std::string_view(user_text).substr(start, end - start))) level = *l;
  }
  auto v = static_cast<int>(table.values[bloom::slot(level)] + 0.5);
  return "AI-SOLVABILITY: " + std::to_string(v) + "%\nMock estimate derived from the " +
         std::string(bloom::to_string(level)) + " level.";
}

struct MockScript {
  std::map<std::string, std::vector<std::string>> responses;
  std::vector<std::string> holistic;
  std::optional<std::string> default_reply;
  bool chat_fail = false;
  bool embed_fail = false;

  static MockScript from_json(const nlohmann::json& j) {
    MockScript s;
    auto as_list = [](const nlohmann::json& v) {
      std::vector<std::string> out;
      if (v.is_string()) {
        out.push_back(v.get<std::string>());
      } else if (v.is_array()) {
        for (const auto& e : v) out.push_back(e.get<std::string>());
      } else {
        throw Error(ErrorCode::InvalidConfig, "mock replies must be strings or lists of strings");
      }
      if (out.empty()) throw Error(ErrorCode::InvalidConfig, "empty mock reply list");
      return out;
    };
    try {
      if (j.contains("chat")) {
        const auto& c = j["chat"];
        if (c.contains("responses")) {
          for (const auto& [k, v] : c["responses"].items()) s.responses[k] = as_list(v);
        }
        if (c.contains("holistic")) s.holistic = as_list(c["holistic"]);
        if (c.contains("default")) s.default_reply = c["default"].get<std::string>();
        s.chat_fail = c.value("fail", false);
      }
      if (j.contains("embed")) s.embed_fail = j["embed"].value("fail", false);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, std::string("mock script: ") + e.what());
    }
    return s;
  }

  static MockScript load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read mock script '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      return from_json(nlohmann::json::parse(ss.str()));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::InvalidConfig, "mock script '" + path + "': " + e.what());
    }
  }
};

class ScriptedChatTransport final : public judge::ChatTransport {
 public:
  explicit ScriptedChatTransport(MockScript script = {}, bloom::SolvabilityTable table = {})
      : script_(std::move(script)), table_(table) {}

  std::string id() const override { return "mock-chat"; }

  std::string complete(const judge::ChatRequest& request) override {
    if (script_.chat_fail) throw Error(ErrorCode::ProviderUnavailable, "scripted chat failure");
    std::optional<std::string> reply;
    auto fenced = judge::fenced_text(request.user);
    bool holistic = request.user.rfind(judge::kAssignmentPromptLead, 0) == 0;
    if (holistic && !script_.holistic.empty()) {
      reply = next("\x01holistic", script_.holistic);
    } else if (!holistic && fenced) {
      if (auto it = script_.responses.find(*fenced); it != script_.responses.end()) reply = next(*fenced, it->second);
    }
    if (!reply) reply = script_.default_reply ? *script_.default_reply : lexicon_echo_reply(request.user, table_);
    if (*reply == "!timeout") throw Error(ErrorCode::ProviderUnavailable, "scripted timeout");
    if (*reply == "!error") throw Error(ErrorCode::ProviderUnavailable, "scripted transport error");
    return *reply;
  }

 private:
  std::string next(const std::string& key, const std::vector<std::string>& list) {
    std::lock_guard lock(mu_);
    auto& n = calls_[key];
    const auto& r = list[std::min(n, list.size() - 1)];
    ++n;
    return r;
  }

  MockScript script_;
  bloom::SolvabilityTable table_;
  std::mutex mu_;
  std::map<std::string, std::size_t> calls_;
};

/// Wraps another embedder and fails every call when told to.
class FailingEmbedder final : public semantic::EmbeddingProvider {
 public:
  std::string id() const override { return "mock-embed-down"; }
  std::vector<semantic::EmbeddingVector> embed(const std::vector<std::string>&) override {
    throw Error(ErrorCode::ProviderUnavailable, "scripted embedding failure");
  }
};

}  // namespace bloomgate::mock
