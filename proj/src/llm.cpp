#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "numgame/error.hpp"
#include "numgame/proposals.hpp"

namespace numgame {

namespace {

std::string env_or(const char* name, std::string fallback = {}) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : fallback;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw UsageError("LLM endpoint must be an http(s) URL, got '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos)
    return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::optional<double>> read_scores(const nlohmann::json& j) {
  std::vector<std::optional<double>> out;
  if (!j.contains("scores") || !j.at("scores").is_array())
    return out;
  for (const auto& s : j.at("scores"))
    out.push_back(s.is_number() ? std::optional<double>(s.get<double>()) : std::nullopt);
  return out;
}

} // namespace

LlmConfig LlmConfig::from_env() {
  LlmConfig cfg;
  cfg.endpoint = env_or("NUMGAME_LLM_URL");
  cfg.auth_token = env_or("NUMGAME_LLM_TOKEN");
  cfg.model = env_or("NUMGAME_LLM_MODEL");
  return cfg;
}

std::string render_prompt(const ProposalRequest& req) {
  std::ostringstream p;
  p << "You are helping infer a hidden rule over the integers " << req.space.lo << " to " << req.space.hi
    << ".\n"
       "Write candidate rules in this predicate language, one per line, with no other text:\n"
       "  expr := atom | not(expr) | and(expr, expr, ...) | or(expr, expr, ...) | shift(offset, expr)\n"
       "  atom := divisible(k) | mod_eq(k, r) | less_than(c) | greater_than(c) | ends_in(d)\n"
       "        | digit_sum_less(c) | digit_sum_eq(c) | square | cube | power_of(b) | prime\n"
       "        | in_set(n1, n2, ...) | even | odd | true | false\n"
       "  shift(o, e) holds at x when e holds at x + o; k, b >= 2; 0 <= r < k; |o| <= 10.\n"
       "Every rule must agree with all labeled examples below.\n\nExamples:\n";
  for (const auto& ex : req.data)
    p << "  " << ex.x << " -> " << (ex.y ? "yes" : "no") << "\n";
  if (req.data.empty())
    p << "  (none yet)\n";
  p << "\nPropose " << req.num_proposals << " distinct rules.\n";
  return p.str();
}

nlohmann::json request_key(const LlmConfig& cfg, const ProposalRequest& req) {
  Dataset sorted = req.data;
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledExample& a, const LabeledExample& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  nlohmann::json examples = nlohmann::json::array();
  for (const auto& ex : sorted)
    examples.push_back({ex.x, ex.y ? 1 : 0});
  return {{"template_version", kPromptTemplateVersion},
          {"model", cfg.model},
          {"space", {req.space.lo, req.space.hi}},
          {"num_proposals", req.num_proposals},
          {"attempt", req.attempt},
          {"examples", examples}};
}

std::string request_hash(const LlmConfig& cfg, const ProposalRequest& req) {
  return sha256_hex(request_key(cfg, req).dump());
}

std::vector<std::string> extract_candidates(std::string_view response_text, std::size_t max_candidates) {
  std::vector<std::string> out;
  std::istringstream in{std::string(response_text)};
  std::string line;
  while (out.size() < max_candidates && std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t.rfind("```", 0) == 0)
      continue;
    out.push_back(std::move(t));
  }
  return out;
}

LlmBackend::LlmBackend(LlmConfig cfg) : cfg_(std::move(cfg)) {}

LlmBackend::Response LlmBackend::fetch(const nlohmann::json& body) {
  if (cfg_.endpoint.empty())
    throw BackendUnavailable("no LLM endpoint configured (set NUMGAME_LLM_URL)");
  const auto ep = split_endpoint(cfg_.endpoint);
  const auto timeout = std::chrono::duration<double>(cfg_.timeout_s);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  httplib::Headers headers;
  if (!cfg_.auth_token.empty())
    headers.emplace("Authorization", "Bearer " + cfg_.auth_token);

  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.backoff_ms) * (1 << (attempt - 1)));
    ++network_calls_;
    httplib::Client client(ep.scheme_host_port);
    client.set_connection_timeout(timeout_us);
    client.set_read_timeout(timeout_us);
    client.set_write_timeout(timeout_us);
    auto res = client.Post(ep.path, headers, body.dump(), "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    // Bodies that are not {"text": ...} JSON are taken verbatim as the response text.
    try {
      auto j = nlohmann::json::parse(res->body);
      if (j.is_object() && j.contains("text") && j.at("text").is_string())
        return {j.at("text").get<std::string>(), read_scores(j)};
    } catch (const nlohmann::json::exception&) {
    }
    return {res->body, {}};
  }
  throw BackendUnavailable("LLM endpoint " + cfg_.endpoint + " unavailable after " + std::to_string(cfg_.retries + 1) +
                           " attempts: " + last_error);
}

RawProposals LlmBackend::propose(const ProposalRequest& req) {
  req.validate();
  const auto key = request_key(cfg_, req);
  const auto hash = sha256_hex(key.dump());
  const auto cache_file = cfg_.cache_dir / (hash + ".json");
  const auto max = static_cast<std::size_t>(req.num_proposals);

  if (cfg_.use_cache || cfg_.replay_only) {
    if (std::filesystem::exists(cache_file)) {
      try {
        auto j = nlohmann::json::parse(read_file(cache_file));
        ++cache_hits_;
        return {extract_candidates(j.at("response_text").get<std::string>(), max), read_scores(j)};
      } catch (const nlohmann::json::exception& ex) {
        throw BackendUnavailable("corrupt replay cache entry " + cache_file.string() + ": " + ex.what());
      }
    }
    if (cfg_.replay_only)
      throw BackendUnavailable("replay cache miss for request " + hash + " in replay-only mode");
  }

  const nlohmann::json body = {{"prompt", render_prompt(req)}, {"max_candidates", req.num_proposals}};
  Response r = fetch(body);
  if (cfg_.use_cache) {
    nlohmann::json entry = {{"request", key},
                            {"response_text", r.text},
                            {"timestamp", utc_timestamp()},
                            {"template_version", kPromptTemplateVersion}};
    if (!r.scores.empty()) {
      nlohmann::json scores = nlohmann::json::array();
      for (const auto& s : r.scores)
        scores.push_back(s ? nlohmann::json(*s) : nlohmann::json(nullptr));
      entry["scores"] = scores;
    }
    atomic_write(cache_file, entry.dump(2));
  }
  return {extract_candidates(r.text, max), std::move(r.scores)};
}

ProposalBatch llm_generate(LlmBackend& backend, const ProposalRequest& req) { return generate(backend, req); }

} // namespace numgame
