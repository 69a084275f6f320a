#include <doctest.h>

#include "numgame/error.hpp"
#include "numgame/trace.hpp"

using namespace numgame;

TEST_CASE("run records round-trip through JSONL") {
  const auto cat = catalog();
  for (const char* id : {"odd_numbers", "ends_in_6", "prime_minus_1"}) {
    for (auto policy : {PolicyKind::EIG, PolicyKind::PTS, PolicyKind::Passive}) {
      RunConfig cfg;
      cfg.policy = policy;
      cfg.seed = 4;
      cfg.budget = 10;
      GrammarBackend backend(builtin_profile("degraded"), cfg.seed);
      const auto rec = run_trial(*find_concept(cat, id), cfg, backend);
      const auto text = record_to_jsonl(rec);
      const auto back = record_from_jsonl(text);
      CHECK(record_to_jsonl(back) == text);
      CHECK(back.concept_id == rec.concept_id);
      CHECK(back.outcome.kind == rec.outcome.kind);
      CHECK(back.iterations.size() == rec.iterations.size());
      CHECK(back.config.effective_rejuv_batch() == rec.config.effective_rejuv_batch());
    }
  }
}

TEST_CASE("aborted outcome keeps its reason") {
  RunRecord rec;
  rec.concept_id = "x";
  rec.outcome = {OutcomeKind::Aborted, 0, false, "endpoint down"};
  const auto back = record_from_jsonl(record_to_jsonl(rec));
  CHECK(back.outcome.kind == OutcomeKind::Aborted);
  CHECK(back.outcome.abort_reason == "endpoint down");
}

TEST_CASE("config JSON carries every run setting") {
  RunConfig cfg;
  cfg.budget = 7;
  cfg.particles = 9;
  cfg.conf_threshold = 0.9;
  cfg.ess_frac = 0.25;
  cfg.rejuv_batch = 11;
  cfg.rejuv_retries = 1;
  cfg.seed = 12345678901ull;
  cfg.policy = PolicyKind::PTS;
  cfg.seed_positive = false;
  cfg.prior.lambda = 0.3;
  cfg.prior.use_backend_score = false;
  const auto back = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
  CHECK(back.seed == cfg.seed);
  CHECK(back.policy == PolicyKind::PTS);
}

TEST_CASE("malformed trajectories are usage errors") {
  CHECK_THROWS_AS(record_from_jsonl(""), UsageError);
  CHECK_THROWS_AS(record_from_jsonl("{not json}\n"), UsageError);
  CHECK_THROWS_AS(record_from_jsonl(R"({"type": "header"})"), UsageError);
  CHECK_THROWS_AS(read_trajectory("/nonexistent/trajectory.jsonl"), Error);
}

TEST_CASE("particles serialize as text and weight pairs") {
  const InstanceSpace s;
  ParticleSet ps(s, {{dsl::Hypothesis::from_text("odd", s), 0.25}, {dsl::Hypothesis::from_text("even", s), 0.75}});
  const auto j = particles_to_json(ps);
  REQUIRE(j.size() == 2);
  CHECK(j[0]["canonical_text"] == "odd");
  CHECK(j[1]["weight"] == 0.75);
}
