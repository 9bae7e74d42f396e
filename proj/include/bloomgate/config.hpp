#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bloomgate/bloom.hpp"
#include "bloomgate/error.hpp"
#include "bloomgate/fusion.hpp"
#include "bloomgate/judge.hpp"
#include "bloomgate/lexical.hpp"
#include "bloomgate/text.hpp"

namespace bloomgate {

inline constexpr std::string_view kChatTokenEnv = "BLOOMGATE_CHAT_TOKEN";
inline constexpr std::string_view kEmbedTokenEnv = "BLOOMGATE_EMBED_TOKEN";
inline constexpr std::string_view kApiTokenEnv = "BLOOMGATE_API_TOKEN";

inline std::string env_or_empty(std::string_view name) {
  const char* v = std::getenv(std::string(name).c_str());
  return v ? std::string(v) : std::string();
}

/// Runtime configuration. The file format is a flat TOML subset:
/// `key = value` lines, optional `[section]` headers that prefix keys,
/// `#` comments, and optionally double-quoted string values.
struct Config {
  std::string server_host = "127.0.0.1";
  int server_port = 8080;
  std::string cors_origin = "http://localhost:5173";
  bool require_auth = false;
  std::string store_path = "bloomgate-store";

  judge::ProviderConfig chat;
  std::string embed_base_url;
  int embed_timeout_ms = 30000;
  int embed_max_retries = 2;

  fusion::FusionWeights weights;
  fusion::BandThresholds thresholds;
  bloom::SolvabilityTable bloom_table;
  double rarity_saturation = lexical::kDefaultRaritySaturation;

  std::size_t max_questions_sync = 25;
  std::size_t provider_parallelism = 4;
  std::size_t max_body_bytes = 16u * 1024u * 1024u;

  std::optional<std::string> lexicon_path;
  std::optional<std::string> bank_path;
  std::optional<std::string> seed_corpus_path;
  std::optional<std::string> stop_list_path;

  void validate() const {
    weights.validate();
    thresholds.validate();
    chat.validate();
    if (!bloom_table.strictly_decreasing()) {
      throw Error(ErrorCode::InvalidConfig, "bloom.solvability must be strictly decreasing from Remember to Create");
    }
    for (double v : bloom_table.values) {
      if (!(v >= 0.0 && v <= 100.0)) throw Error(ErrorCode::InvalidConfig, "bloom.solvability values must lie in [0,100]");
    }
    if (!(rarity_saturation > 0.0)) throw Error(ErrorCode::InvalidConfig, "lexical.rarity_saturation must be positive");
    if (provider_parallelism == 0) throw Error(ErrorCode::InvalidConfig, "limits.provider_parallelism must be >= 1");
    if (max_questions_sync == 0) throw Error(ErrorCode::InvalidConfig, "limits.max_questions_sync must be >= 1");
    if (server_port <= 0 || server_port > 65535) throw Error(ErrorCode::InvalidConfig, "server.port out of range");
    if (embed_timeout_ms <= 0 || embed_max_retries < 0) throw Error(ErrorCode::InvalidConfig, "bad embed provider limits");
  }

  static Config parse(std::string_view content) {
    Config c;
    std::string section;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) -> void {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": " + why);
    };
    for (auto raw : text::split_lines(content)) {
      ++line_no;
      auto line = text::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail("unterminated section header");
        section = std::string(text::trim(line.substr(1, line.size() - 2)));
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string_view::npos) fail("expected key = value");
      std::string key(text::trim(line.substr(0, eq)));
      std::string value(text::trim(line.substr(eq + 1)));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        value = value.substr(1, value.size() - 2);
      } else if (auto hash = value.find(" #"); hash != std::string::npos) {
        value = std::string(text::trim(std::string_view(value).substr(0, hash)));
      }
      if (!section.empty()) key = section + "." + key;
      try {
        c.set(key, value);
      } catch (const Error& e) {
        fail(e.what());
      }
    }
    c.validate();
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  std::string chat_token() const { return env_or_empty(kChatTokenEnv); }
  std::string embed_token() const { return env_or_empty(kEmbedTokenEnv); }

 private:
  static double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw Error(ErrorCode::InvalidConfig, key + ": not a number '" + v + "'");
    }
    return out;
  }

  static long to_int(const std::string& key, const std::string& v) {
    long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw Error(ErrorCode::InvalidConfig, key + ": not an integer '" + v + "'");
    }
    return out;
  }

  static bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw Error(ErrorCode::InvalidConfig, key + ": not a boolean '" + v + "'");
  }

  static std::vector<double> to_list(const std::string& key, std::string v) {
    if (!v.empty() && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
      auto comma = v.find(',', pos);
      std::string item(text::trim(std::string_view(v).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
      if (!item.empty()) out.push_back(to_double(key, item));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return out;
  }

  void set(const std::string& key, const std::string& v) {
    if (key == "server.host") server_host = v;
    else if (key == "server.port") server_port = static_cast<int>(to_int(key, v));
    else if (key == "server.cors_origin") cors_origin = v;
    else if (key == "server.require_auth") require_auth = to_bool(key, v);
    else if (key == "store.path") store_path = v;
    else if (key == "providers.chat.base_url") chat.base_url = v;
    else if (key == "providers.chat.model") chat.model_name = v;
    else if (key == "providers.chat.timeout_ms") chat.timeout_ms = static_cast<int>(to_int(key, v));
    else if (key == "providers.chat.max_retries") chat.max_retries = static_cast<int>(to_int(key, v));
    else if (key == "providers.chat.temperature") chat.temperature = to_double(key, v);
    else if (key == "providers.embed.base_url") embed_base_url = v;
    else if (key == "providers.embed.timeout_ms") embed_timeout_ms = static_cast<int>(to_int(key, v));
    else if (key == "providers.embed.max_retries") embed_max_retries = static_cast<int>(to_int(key, v));
    else if (key == "fusion.weights.judge") weights.judge = to_double(key, v);
    else if (key == "fusion.weights.bloom") weights.bloom = to_double(key, v);
    else if (key == "fusion.weights.semantic") weights.semantic = to_double(key, v);
    else if (key == "fusion.weights.lexical") weights.lexical = to_double(key, v);
    else if (key == "bands.thresholds") {
      auto l = to_list(key, v);
      if (l.size() != 3) throw Error(ErrorCode::InvalidConfig, "bands.thresholds needs three values (Medium, Medium-High, High)");
      thresholds = {l[0], l[1], l[2]};
    } else if (key == "bloom.solvability") {
      auto l = to_list(key, v);
      if (l.size() != bloom::kLevelCount) throw Error(ErrorCode::InvalidConfig, "bloom.solvability needs six values");
      for (std::size_t i = 0; i < bloom::kLevelCount; ++i) bloom_table.values[i] = l[i];
    } else if (key == "bloom.lexicon_path") lexicon_path = v;
    else if (key == "semantic.bank_path") bank_path = v;
    else if (key == "lexical.seed_corpus_path") seed_corpus_path = v;
    else if (key == "lexical.stop_list_path") stop_list_path = v;
    else if (key == "lexical.rarity_saturation") rarity_saturation = to_double(key, v);
    else if (key == "limits.max_questions_sync") max_questions_sync = static_cast<std::size_t>(to_int(key, v));
    else if (key == "limits.provider_parallelism") provider_parallelism = static_cast<std::size_t>(to_int(key, v));
    else if (key == "limits.max_body_bytes") max_body_bytes = static_cast<std::size_t>(to_int(key, v));
    else throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
  }
};

}  // namespace bloomgate
