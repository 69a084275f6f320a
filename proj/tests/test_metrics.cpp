#include <doctest.h>

#include <algorithm>
#include <random>

#include "numgame/error.hpp"
#include "numgame/metrics.hpp"

using namespace numgame;

namespace {

RunRecord rec(const std::string& id, PolicyKind p, std::uint64_t seed, OutcomeKind kind, int queries = 0,
              bool correct = true, Tier tier = Tier::Easy) {
  RunRecord r;
  r.concept_id = id;
  r.tier = tier;
  r.config.policy = p;
  r.config.seed = seed;
  r.outcome = {kind, kind == OutcomeKind::Converged ? queries : 0, kind == OutcomeKind::Converged && correct, {}};
  return r;
}

IterationRecord rejuv_row(int t, int requested, int consistent) {
  IterationRecord row;
  row.t = t;
  row.rejuvenated = true;
  row.proposal_stats = ProposalStats{requested, requested, requested, consistent, consistent};
  row.ess_before = 2.0;
  row.map_confidence = 0.5;
  return row;
}

const CellSummary& cell(const GridResult& g, const std::string& id, PolicyKind p) {
  auto it = std::find_if(g.cells.begin(), g.cells.end(),
                         [&](const CellSummary& c) { return c.concept_id == id && c.policy == p; });
  REQUIRE(it != g.cells.end());
  return *it;
}

} // namespace

TEST_CASE("median") {
  CHECK(median({2, 4, 6}) == 4.0);
  CHECK(median({6, 2, 4, 8}) == 5.0);
  CHECK(median({7}) == 7.0);
  CHECK_THROWS_AS(median({}), AggregationError);
}

TEST_CASE("aggregate medians over finishers and counts DNFs") {
  std::vector<RunRecord> rs = {
      rec("a", PolicyKind::EIG, 0, OutcomeKind::Converged, 2), rec("a", PolicyKind::EIG, 1, OutcomeKind::Converged, 4),
      rec("a", PolicyKind::EIG, 2, OutcomeKind::Converged, 6), rec("b", PolicyKind::EIG, 0, OutcomeKind::DNF),
      rec("b", PolicyKind::EIG, 1, OutcomeKind::DNF),          rec("b", PolicyKind::EIG, 2, OutcomeKind::DNF),
      rec("c", PolicyKind::PTS, 0, OutcomeKind::Converged, 3), rec("c", PolicyKind::PTS, 1, OutcomeKind::DNF),
      rec("c", PolicyKind::PTS, 2, OutcomeKind::Converged, 5, false)};
  const auto g = aggregate(rs);
  CHECK(g.rows.size() == 9);
  CHECK(*cell(g, "a", PolicyKind::EIG).median_queries == 4.0);
  const auto& b = cell(g, "b", PolicyKind::EIG);
  CHECK_FALSE(b.median_queries.has_value());
  CHECK(b.dnf_count == 3);
  CHECK(b.seeds == 3);
  const auto& c = cell(g, "c", PolicyKind::PTS);
  CHECK(*c.median_queries == 4.0);
  CHECK(c.dnf_count == 1);
  CHECK(c.finished == 2);
  CHECK(c.correct_count == 1);
}

TEST_CASE("aggregate rejects duplicate cells") {
  std::vector<RunRecord> rs = {rec("a", PolicyKind::EIG, 0, OutcomeKind::Converged, 2),
                               rec("a", PolicyKind::EIG, 0, OutcomeKind::DNF)};
  CHECK_THROWS_AS(aggregate(rs), AggregationError);
}

TEST_CASE("aggregation is permutation invariant") {
  std::vector<RunRecord> rs;
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> q(1, 50), kind(0, 3);
  for (const char* id : {"x", "y", "z"})
    for (auto p : {PolicyKind::EIG, PolicyKind::PTS, PolicyKind::Passive})
      for (std::uint64_t s = 0; s < 5; ++s)
        rs.push_back(rec(id, p, s, kind(rng) == 0 ? OutcomeKind::DNF : OutcomeKind::Converged, q(rng), true,
                         id[0] == 'z' ? Tier::Hard : Tier::Easy));
  const auto base = aggregate(rs);
  const auto base_csv = results_csv(base);
  const auto base_table = tier_table(base);
  CHECK(base.rows.size() == 45);
  CHECK(base.cells.size() == 9);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(rs.begin(), rs.end(), rng);
    const auto g = aggregate(rs);
    CHECK(results_csv(g) == base_csv);
    CHECK(tier_table(g) == base_table);
    CHECK(nll_csv(rs) == nll_csv(std::vector<RunRecord>(rs.rbegin(), rs.rend())));
  }
}

TEST_CASE("results csv format") {
  std::vector<RunRecord> rs = {rec("odd_numbers", PolicyKind::PTS, 1, OutcomeKind::DNF),
                               rec("odd_numbers", PolicyKind::PTS, 0, OutcomeKind::Converged, 7)};
  CHECK(results_csv(aggregate(rs)) == "concept_id,tier,policy,seed,outcome,queries,correct\n"
                                      "odd_numbers,Easy,pts,0,converged,7,1\n"
                                      "odd_numbers,Easy,pts,1,dnf,DNF,0\n");
}

TEST_CASE("mismatch report averages consistency over rejuvenation events") {
  auto eig = rec("a", PolicyKind::EIG, 0, OutcomeKind::DNF);
  eig.iterations = {rejuv_row(1, 10, 2), rejuv_row(2, 20, 4)};
  auto pts = rec("a", PolicyKind::PTS, 0, OutcomeKind::Converged, 3);
  pts.iterations = {rejuv_row(1, 10, 8), rejuv_row(3, 5, 4)};
  // The initial round and quiet iterations are not events.
  IterationRecord init;
  init.proposal_stats = ProposalStats{20, 20, 20, 0, 0};
  IterationRecord quiet;
  quiet.t = 2;
  pts.iterations.insert(pts.iterations.begin(), init);
  pts.iterations.push_back(quiet);
  const auto rep = mismatch_report({eig, pts});
  CHECK(rep.mean_consistent_rate_by_policy.at(PolicyKind::EIG) == doctest::Approx(0.2));
  CHECK(rep.mean_consistent_rate_by_policy.at(PolicyKind::PTS) == doctest::Approx(0.8));
  CHECK(rep.events_by_policy.at(PolicyKind::EIG) == 2);
  CHECK(rep.events_by_policy.at(PolicyKind::PTS) == 2);
  CHECK(rep.dnf_rate_by_policy.at(PolicyKind::EIG) == 1.0);
  CHECK(rep.dnf_rate_by_policy.at(PolicyKind::PTS) == 0.0);
  CHECK(rep.series.size() == 4);
  for (const auto& p : rep.series) {
    CHECK(p.consistent_rate >= 0.0);
    CHECK(p.consistent_rate <= 1.0);
    CHECK(p.parse_valid_rate <= 1.0);
  }
  const auto csv = mismatch_csv(rep);
  CHECK(csv.rfind("policy,iteration,parse_valid_rate,consistent_rate,novel_rate,ess\n", 0) == 0);
  CHECK(csv.find("eig,1,1.000000,0.200000,0.200000,2.000000\n") != std::string::npos);
}

TEST_CASE("runs without rejuvenations contribute no consistency samples") {
  auto r = rec("a", PolicyKind::EIG, 0, OutcomeKind::Converged, 4);
  IterationRecord row;
  row.t = 1;
  r.iterations = {row};
  const auto rep = mismatch_report({r});
  CHECK(rep.series.empty());
  CHECK(rep.mean_consistent_rate_by_policy.empty());
  CHECK(mismatch_summary(rep).find("no rejuvenations recorded") != std::string::npos);
}

TEST_CASE("nll series and csv") {
  auto r = rec("a", PolicyKind::EIG, 2, OutcomeKind::Converged, 2);
  for (int t = 0; t < 3; ++t) {
    IterationRecord row;
    row.t = t;
    row.nll_true = t == 2 ? 0.0 : nll_cap();
    r.iterations.push_back(row);
  }
  const auto s = nll_series(r);
  REQUIRE(s.size() == 3);
  CHECK(s[0].second == doctest::Approx(29.897).epsilon(1e-4));
  CHECK(s[2] == std::pair<int, double>{2, 0.0});
  CHECK(nll_csv({r}) == "concept_id,policy,seed,t,nll_bits\n"
                        "a,eig,2,0,29.897353\n"
                        "a,eig,2,1,29.897353\n"
                        "a,eig,2,2,0.000000\n");
}

TEST_CASE("tier table and findings") {
  std::vector<RunRecord> rs = {rec("a", PolicyKind::EIG, 0, OutcomeKind::Converged, 3),
                               rec("a", PolicyKind::EIG, 1, OutcomeKind::DNF),
                               rec("a", PolicyKind::PTS, 0, OutcomeKind::Converged, 5),
                               rec("a", PolicyKind::PTS, 1, OutcomeKind::Converged, 6),
                               rec("h", PolicyKind::EIG, 0, OutcomeKind::DNF, 0, false, Tier::Hard),
                               rec("h", PolicyKind::PTS, 0, OutcomeKind::Aborted, 0, false, Tier::Hard)};
  const auto g = aggregate(rs);
  const auto table = tier_table(g);
  CHECK(table.find("[Easy]") != std::string::npos);
  CHECK(table.find("[Hard]") != std::string::npos);
  CHECK(table.find("3 (1 DNF)") != std::string::npos);
  CHECK(table.find("5.5") != std::string::npos);
  CHECK(table.find("ABORT") != std::string::npos);
  const auto findings = tier_findings(g);
  CHECK(findings.find("Easy:") != std::string::npos);
  CHECK(findings.find("lowest median queries: eig") != std::string::npos);
  CHECK(findings.find("none (no policy converged)") != std::string::npos);
}
