#include <doctest.h>

#include <filesystem>
#include <random>
#include <thread>

#include <httplib.h>

#include "numgame/error.hpp"
#include "numgame/proposals.hpp"

using namespace numgame;

namespace {

const InstanceSpace kSpace{0, 100};

ProposalRequest request(Dataset data, int n, int round = 0) {
  ProposalRequest r;
  r.data = std::move(data);
  r.space = kSpace;
  r.num_proposals = n;
  r.round = round;
  return r;
}

Extension ext(const char* text) { return dsl::Hypothesis::from_text(text, kSpace)->extension(); }

void check_contract(const ProposalBatch& b, const ProposalRequest& req) {
  CHECK(b.raw_texts.size() <= static_cast<std::size_t>(req.num_proposals));
  CHECK(b.parsed_ok.size() <= b.raw_texts.size());
  const auto& s = b.stats;
  CHECK(s.requested >= s.returned);
  CHECK(s.returned >= s.parse_valid);
  CHECK(s.parse_valid >= s.consistent);
  CHECK(s.consistent >= s.novel_extensions);
  CHECK(s.novel_extensions >= 0);
  const bool has_pos = count_positives(req.data) > 0;
  for (const auto& h : b.parsed_ok) {
    for (const auto& ex : req.data)
      CHECK(h->contains(ex.x) == ex.y);
    if (has_pos)
      CHECK_FALSE(h->extension().empty());
  }
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char* tag) {
    path = std::filesystem::temp_directory_path() / (std::string("numgame_") + tag + "_" +
                                                     std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

// Local stand-in for a completion endpoint that answers every POST with a fixed body.
struct FakeEndpoint {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};

  explicit FakeEndpoint(std::string body) {
    server.Post("/v1/complete", [this, body](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.set_content(body, "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeEndpoint() {
    server.stop();
    thread.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1/complete"; }
};

} // namespace

TEST_CASE("filter examples") {
  auto dup = filter({"divisible(4)", "divisible(4)"}, {}, kSpace);
  CHECK(dup.hypotheses.size() == 1);
  CHECK(dup.stats.parse_valid == 2);
  CHECK(dup.stats.novel_extensions == 1);

  auto odd = filter({"odd"}, {{4, true}}, kSpace);
  CHECK(odd.stats.parse_valid == 1);
  CHECK(odd.stats.consistent == 0);
  CHECK(odd.hypotheses.empty());

  auto none = filter({}, {}, kSpace);
  CHECK(none.stats == ProposalStats{});

  // Syntactic variants collapse to the shortest text.
  auto variants = filter({"and(even, divisible(4))", "mod_eq(4, 0)", "divisible(4)"}, {{8, true}}, kSpace);
  REQUIRE(variants.hypotheses.size() == 1);
  CHECK(variants.hypotheses[0]->text() == "divisible(4)");

  // Empty extensions are dropped even before any positive arrives.
  CHECK(filter({"false"}, {{3, false}}, kSpace).hypotheses.empty());
  CHECK(filter({"false"}, {}, kSpace).stats.parse_valid == 1);
}

TEST_CASE("filter is monotone in the data") {
  std::vector<std::string> raw = {"even", "divisible(4)", "power_of(2)", "square", "less_than(20)", "true",
                                  "or(prime, even)", "divisible(8)", "nonsense(", "greater_than(2)"};
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> x(0, 100);
  for (int trial = 0; trial < 100; ++trial) {
    Dataset d;
    std::set<std::string> prev;
    for (auto& h : filter(raw, d, kSpace).hypotheses)
      prev.insert(h->text());
    for (int k = 0; k < 5; ++k) {
      const int v = x(rng);
      d.push_back({v, v % 4 == 0});
      std::set<std::string> cur;
      for (auto& h : filter(raw, d, kSpace).hypotheses)
        cur.insert(h->text());
      CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
      prev = cur;
    }
  }
}

TEST_CASE("generate enforces the contract on adversarial backends") {
  CallbackBackend evil([](const ProposalRequest& req) {
    RawProposals r;
    r.texts = {"", "   ", "odd", "even", "divisible(0)", "and(", "false", "x > 3", "shift(1, prime)",
               "in_set(4, 16)", "not(odd)", "true", "DIVISIBLE(2)", "power_of(2)"};
    r.texts.resize(std::min<std::size_t>(r.texts.size(), req.num_proposals));
    return r;
  });
  for (const auto& data : std::vector<Dataset>{{}, {{4, true}}, {{4, true}, {16, true}, {5, false}}, {{9, false}}}) {
    auto req = request(data, 14);
    check_contract(generate(evil, req), req);
  }

  CallbackBackend chatty([](const ProposalRequest& req) {
    RawProposals r;
    r.texts.assign(req.num_proposals + 10, "odd");
    return r;
  });
  auto req = request({}, 5);
  auto b = generate(chatty, req);
  CHECK(b.raw_texts.size() == 5);
  CHECK(b.stats.returned == 5);
}

TEST_CASE("request validation") {
  CHECK_THROWS_AS(request({}, 0).validate(), UsageError);
  CHECK_THROWS_AS(request({}, 65).validate(), UsageError);
  CHECK_NOTHROW(request({}, 64).validate());
  CHECK_THROWS_AS(request({{101, true}}, 4).validate(), DomainError);
}

TEST_CASE("grammar backend respects the consistency filter") {
  const auto full = builtin_profile("full");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto req = request({{16, true}}, 8);
    auto b = grammar_sample(full, req, seed);
    check_contract(b, req);
    for (const auto& h : b.parsed_ok)
      CHECK(h->contains(16));
    auto empty_req = request({}, 8);
    check_contract(grammar_sample(full, empty_req, seed), empty_req);
  }
}

TEST_CASE("grammar sampling is deterministic") {
  const auto full = builtin_profile("full");
  auto req = request({{4, true}, {9, false}}, 32);
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    auto a = grammar_sample(full, req, seed);
    auto b = grammar_sample(full, req, seed);
    CHECK(a.raw_texts == b.raw_texts);
    CHECK(a.stats == b.stats);
  }
  CHECK(grammar_sample(full, req, 1).raw_texts != grammar_sample(full, req, 2).raw_texts);
  GrammarBackend g1(full, 5), g2(full, 5);
  CHECK(g1.propose(req).texts == g2.propose(req).texts);
}

TEST_CASE("a profile without thresholds cannot reach even numbers below 30") {
  auto p = builtin_profile("full");
  p.allowed_atoms.erase(dsl::AtomKind::LessThan);
  p.allowed_atoms.erase(dsl::AtomKind::GreaterThan);
  const auto target = ext("and(even, less_than(30))");
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const auto e = sample_expr(p, rng);
    CHECK_FALSE(dsl::extension_of(e, kSpace) == target);
  }
}

TEST_CASE("full profile recovers multiples of 4 from two positives") {
  const auto full = builtin_profile("full");
  const auto target = ext("divisible(4)");
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto b = grammar_sample(full, request({{4, true}, {8, true}}, 64), seed);
    hits += std::any_of(b.parsed_ok.begin(), b.parsed_ok.end(),
                        [&](const dsl::HypothesisPtr& h) { return h->extension() == target; });
  }
  CHECK(hits >= 95);
}

TEST_CASE("degraded profile loses consistency near boundary negatives") {
  const auto degraded = builtin_profile("degraded");
  const Dataset near = {{4, true}, {8, true}, {3, false}, {5, false}, {7, false}};
  const Dataset far = {{4, true}, {8, true}, {51, false}, {53, false}, {55, false}};
  CHECK(dataset_feature(DatasetFeature::BoundaryNegatives, near, 1) == 3);
  CHECK(dataset_feature(DatasetFeature::BoundaryNegatives, far, 1) == 0);
  auto rate = [&](const Dataset& d, int calls) {
    double consistent = 0, requested = 0;
    for (int s = 0; s < calls; ++s) {
      auto b = grammar_sample(degraded, request(d, 16), s);
      consistent += b.stats.consistent;
      requested += b.stats.requested;
    }
    return consistent / requested;
  };
  CHECK(rate(near, 200) < rate(far, 200));
}

TEST_CASE("consistency rate does not increase with boundary severity") {
  const auto degraded = builtin_profile("degraded");
  // k boundary negatives around positives 20, 40, 60, 80.
  const int around[] = {19, 21, 39, 41, 59, 61};
  double prev_p = -1, prev_rate = 2;
  for (int k = 0; k <= 6; k += 2) {
    Dataset d = {{20, true}, {40, true}, {60, true}, {80, true}};
    for (int i = 0; i < k; ++i)
      d.push_back({around[i], false});
    for (int i = k; i < 6; ++i)
      d.push_back({around[i] + 4, false});
    const double p = degraded.failure_probability(d);
    CHECK(p >= prev_p);
    prev_p = p;
    double consistent = 0, requested = 0;
    for (int s = 0; s < 250; ++s) {
      auto b = grammar_sample(degraded, request(d, 8), 1000 + s);
      consistent += b.stats.consistent;
      requested += b.stats.requested;
    }
    const double r = consistent / requested;
    CHECK(r <= prev_rate + 0.02);
    prev_rate = r;
  }
  // The full profile never degrades.
  Dataset d = {{4, true}, {3, false}, {5, false}};
  CHECK(builtin_profile("full").failure_probability(d) == 0.0);
}

TEST_CASE("profiles round-trip through JSON and validate") {
  for (const auto& name : builtin_profile_names()) {
    const auto p = builtin_profile(name);
    const auto j = profile_to_json(p);
    CHECK(profile_to_json(profile_from_json(j)) == j);
  }
  CHECK_FALSE(builtin_profile("no_prime").allowed_atoms.count(dsl::AtomKind::Prime));
  CHECK_THROWS_AS(builtin_profile("unknown"), UsageError);
  auto bad = profile_to_json(builtin_profile("full"));
  bad["degradation"] = nlohmann::json::array({{{"feature", "boundary_negatives"}, {"base", 1.5}}});
  CHECK_THROWS_AS(profile_from_json(bad), UsageError);
}

TEST_CASE("scripted backend replays rounds") {
  ScriptedBackend b({{"odd"}, {"even", "prime"}});
  auto req = request({}, 4);
  CHECK(b.propose(req).texts == std::vector<std::string>{"odd"});
  CHECK(b.propose(req).texts == std::vector<std::string>{"even", "prime"});
  CHECK(b.propose(req).texts == std::vector<std::string>{"even", "prime"});
  CHECK(b.calls() == 3);
}

TEST_CASE("candidate extraction tolerates fences") {
  auto c = extract_candidates("```\ndivisible(4)\n\n  not a program  \n```python\npower_of(2)\n```", 10);
  CHECK(c == std::vector<std::string>{"divisible(4)", "not a program", "power_of(2)"});
  CHECK(extract_candidates("a\nb\nc", 2).size() == 2);
}

TEST_CASE("llm response goes through the common filter") {
  auto raw = extract_candidates("divisible(4)\nnot a program\npower_of(2)", 16);
  auto r = filter(raw, {{4, true}}, kSpace);
  CHECK(r.stats.returned == 3);
  CHECK(r.stats.parse_valid == 2);
  CHECK(r.stats.consistent == 2);
}

TEST_CASE("request hash ignores example order and tracks the template") {
  LlmConfig cfg;
  cfg.model = "m";
  auto a = request({{4, true}, {9, false}, {16, true}}, 8);
  auto b = request({{16, true}, {4, true}, {9, false}}, 8);
  CHECK(request_hash(cfg, a) == request_hash(cfg, b));
  CHECK(request_hash(cfg, a) != request_hash(cfg, request({{4, true}}, 8)));
  CHECK(request_key(cfg, a).at("template_version") == kPromptTemplateVersion);
  LlmConfig other = cfg;
  other.model = "n";
  CHECK(request_hash(cfg, a) != request_hash(other, a));
  const auto prompt = render_prompt(a);
  CHECK(prompt.find("16 -> yes") != std::string::npos);
  CHECK(prompt.find("9 -> no") != std::string::npos);
}

TEST_CASE("llm backend records and replays") {
  TempDir dir("llm");
  FakeEndpoint ep(R"j({"text": "divisible(4)\nnot a program\npower_of(2)"})j");
  LlmConfig cfg;
  cfg.endpoint = ep.url();
  cfg.cache_dir = dir.path;
  cfg.retries = 0;
  auto req = request({{4, true}}, 8);

  LlmBackend live(cfg);
  auto first = llm_generate(live, req);
  CHECK(live.network_calls() == 1);
  CHECK(first.stats.parse_valid == 2);
  CHECK(first.stats.consistent == 2);
  CHECK(std::filesystem::exists(dir.path / (request_hash(cfg, req) + ".json")));

  LlmConfig replay_cfg = cfg;
  replay_cfg.endpoint = "http://127.0.0.1:1/unused";
  LlmBackend replay(replay_cfg);
  auto second = llm_generate(replay, req);
  CHECK(replay.network_calls() == 0);
  CHECK(replay.cache_hits() == 1);
  CHECK(second.raw_texts == first.raw_texts);
  CHECK(second.stats == first.stats);
  CHECK(ep.hits == 1);

  replay_cfg.replay_only = true;
  LlmBackend strict(replay_cfg);
  CHECK_THROWS_AS(strict.propose(request({{8, true}}, 8)), BackendUnavailable);
  CHECK(strict.network_calls() == 0);
}

TEST_CASE("llm backend reports an unreachable endpoint") {
  TempDir dir("llm_down");
  LlmConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/v1";
  cfg.cache_dir = dir.path;
  cfg.retries = 1;
  cfg.backoff_ms = 1;
  cfg.timeout_s = 1.0;
  LlmBackend b(cfg);
  CHECK_THROWS_AS(b.propose(request({}, 4)), BackendUnavailable);
  CHECK(b.network_calls() == 2);

  LlmConfig unset;
  unset.cache_dir = dir.path;
  unset.use_cache = false;
  CHECK_THROWS_AS(LlmBackend(unset).propose(request({}, 4)), BackendUnavailable);
}

TEST_CASE("malformed llm output is an empty batch, not an error") {
  TempDir dir("llm_junk");
  FakeEndpoint ep("I cannot help with that.");
  LlmConfig cfg;
  cfg.endpoint = ep.url();
  cfg.cache_dir = dir.path;
  LlmBackend b(cfg);
  auto batch = llm_generate(b, request({{4, true}}, 4));
  CHECK(batch.parsed_ok.empty());
  CHECK(batch.stats.returned == 1);
  CHECK(batch.stats.parse_valid == 0);
}
