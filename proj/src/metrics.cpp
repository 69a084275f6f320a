#include "numgame/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

#include "numgame/error.hpp"

namespace numgame {

namespace {

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w)
    s.append(w - s.size(), ' ');
  return s;
}

auto row_key(const GridRow& r) { return std::tie(r.tier, r.concept_id, r.policy, r.seed); }

std::string cell_text(const CellSummary& c) {
  if (!c.median_queries)
    return c.aborted_count == c.seeds ? "ABORT" : "DNF";
  std::string s = fmt(*c.median_queries, 1);
  if (s.size() > 2 && s.substr(s.size() - 2) == ".0")
    s.resize(s.size() - 2);
  if (c.dnf_count + c.aborted_count > 0)
    s += " (" + std::to_string(c.dnf_count + c.aborted_count) + " DNF)";
  return s;
}

std::vector<PolicyKind> policies_in(const GridResult& grid) {
  std::set<PolicyKind> ps;
  for (const auto& c : grid.cells)
    ps.insert(c.policy);
  return {ps.begin(), ps.end()};
}

} // namespace

double median(std::vector<double> v) {
  if (v.empty())
    throw AggregationError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

GridResult aggregate(const std::vector<RunRecord>& records) {
  GridResult g;
  g.rows.reserve(records.size());
  for (const auto& r : records)
    g.rows.push_back({r.concept_id, r.tier, r.config.policy, r.config.seed, r.outcome.kind, r.outcome.queries,
                      r.outcome.correct});
  std::sort(g.rows.begin(), g.rows.end(), [](const GridRow& a, const GridRow& b) { return row_key(a) < row_key(b); });
  for (std::size_t i = 1; i < g.rows.size(); ++i)
    if (row_key(g.rows[i - 1]) == row_key(g.rows[i]))
      throw AggregationError("duplicate cell: " + g.rows[i].concept_id + "/" +
                             std::string(policy_name(g.rows[i].policy)) + "/seed " + std::to_string(g.rows[i].seed));

  for (std::size_t i = 0; i < g.rows.size();) {
    const auto& first = g.rows[i];
    CellSummary c;
    c.concept_id = first.concept_id;
    c.tier = first.tier;
    c.policy = first.policy;
    std::vector<double> q;
    for (; i < g.rows.size() && g.rows[i].concept_id == first.concept_id && g.rows[i].policy == first.policy; ++i) {
      const auto& r = g.rows[i];
      ++c.seeds;
      switch (r.outcome) {
      case OutcomeKind::Converged:
        ++c.finished;
        c.correct_count += r.correct;
        q.push_back(r.queries);
        break;
      case OutcomeKind::DNF:
        ++c.dnf_count;
        break;
      case OutcomeKind::Aborted:
        ++c.aborted_count;
        break;
      }
    }
    if (!q.empty())
      c.median_queries = median(q);
    g.cells.push_back(c);
  }
  return g;
}

MismatchReport mismatch_report(const std::vector<RunRecord>& records) {
  struct Acc {
    int n = 0;
    double pv = 0, cons = 0, nov = 0, ess = 0, conf = 0;
  };
  std::map<std::pair<PolicyKind, int>, Acc> series;
  std::map<PolicyKind, Acc> by_policy;
  std::map<PolicyKind, std::pair<int, int>> dnf; // (dnf, runs)

  for (const auto& rec : records) {
    const PolicyKind pol = rec.config.policy;
    auto& d = dnf[pol];
    ++d.second;
    d.first += rec.outcome.kind == OutcomeKind::DNF;
    for (const auto& it : rec.iterations) {
      if (!it.rejuvenated || !it.proposal_stats || it.proposal_stats->requested <= 0)
        continue;
      const auto& s = *it.proposal_stats;
      const double req = s.requested;
      auto& a = series[{pol, it.t}];
      ++a.n;
      a.pv += s.parse_valid / req;
      a.cons += s.consistent / req;
      a.nov += s.novel_extensions / req;
      a.ess += it.ess_before;
      a.conf += it.map_confidence;
      auto& b = by_policy[pol];
      ++b.n;
      b.cons += s.consistent / req;
    }
  }

  MismatchReport rep;
  for (const auto& [key, a] : series)
    rep.series.push_back({key.first, key.second, a.n, a.pv / a.n, a.cons / a.n, a.nov / a.n, a.ess / a.n, a.conf / a.n});
  for (const auto& [pol, b] : by_policy) {
    rep.mean_consistent_rate_by_policy[pol] = b.cons / b.n;
    rep.events_by_policy[pol] = b.n;
  }
  for (const auto& [pol, d] : dnf)
    rep.dnf_rate_by_policy[pol] = static_cast<double>(d.first) / d.second;
  return rep;
}

std::vector<std::pair<int, double>> nll_series(const RunRecord& record) {
  std::vector<std::pair<int, double>> out;
  out.reserve(record.iterations.size());
  for (const auto& it : record.iterations)
    out.emplace_back(it.t, it.nll_true);
  return out;
}

std::string results_csv(const GridResult& grid) {
  std::string out = "concept_id,tier,policy,seed,outcome,queries,correct\n";
  for (const auto& r : grid.rows) {
    out += r.concept_id + "," + std::string(tier_name(r.tier)) + "," + std::string(policy_name(r.policy)) + "," +
           std::to_string(r.seed) + "," + std::string(outcome_name(r.outcome)) + ",";
    if (r.outcome == OutcomeKind::Converged)
      out += std::to_string(r.queries) + "," + (r.correct ? "1" : "0");
    else
      out += "DNF,0";
    out += "\n";
  }
  return out;
}

std::string nll_csv(const std::vector<RunRecord>& records) {
  std::vector<const RunRecord*> sorted;
  for (const auto& r : records)
    sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const RunRecord* a, const RunRecord* b) {
    return std::tie(a->concept_id, a->config.policy, a->config.seed) <
           std::tie(b->concept_id, b->config.policy, b->config.seed);
  });
  std::string out = "concept_id,policy,seed,t,nll_bits\n";
  for (const auto* r : sorted)
    for (const auto& [t, nll] : nll_series(*r))
      out += r->concept_id + "," + std::string(policy_name(r->config.policy)) + "," + std::to_string(r->config.seed) +
             "," + std::to_string(t) + "," + fmt(nll) + "\n";
  return out;
}

std::string mismatch_csv(const MismatchReport& report) {
  std::string out = "policy,iteration,parse_valid_rate,consistent_rate,novel_rate,ess\n";
  for (const auto& p : report.series)
    out += std::string(policy_name(p.policy)) + "," + std::to_string(p.iteration) + "," + fmt(p.parse_valid_rate) +
           "," + fmt(p.consistent_rate) + "," + fmt(p.novel_rate) + "," + fmt(p.ess) + "\n";
  return out;
}

std::string tier_table(const GridResult& grid) {
  const auto pols = policies_in(grid);
  std::ostringstream o;
  o << pad("Rule", 24);
  for (auto p : pols)
    o << pad(std::string(policy_name(p)), 16);
  o << "\n";
  std::optional<Tier> cur;
  std::map<std::pair<Tier, std::string>, std::map<PolicyKind, const CellSummary*>> by_concept;
  for (const auto& c : grid.cells)
    by_concept[{c.tier, c.concept_id}][c.policy] = &c;
  for (const auto& [key, cells] : by_concept) {
    if (cur != key.first) {
      cur = key.first;
      o << "[" << tier_name(key.first) << "]\n";
    }
    o << pad("  " + key.second, 24);
    for (auto p : pols) {
      auto it = cells.find(p);
      o << pad(it == cells.end() ? "-" : cell_text(*it->second), 16);
    }
    o << "\n";
  }
  return o.str();
}

std::string tier_findings(const GridResult& grid) {
  const auto pols = policies_in(grid);
  std::map<Tier, std::map<PolicyKind, std::vector<double>>> queries;
  std::map<Tier, std::map<PolicyKind, int>> dnfs, correct;
  for (const auto& r : grid.rows) {
    queries[r.tier][r.policy];
    if (r.outcome == OutcomeKind::Converged)
      queries[r.tier][r.policy].push_back(r.queries);
    else
      ++dnfs[r.tier][r.policy];
    correct[r.tier][r.policy] += r.correct;
  }
  std::ostringstream o;
  for (const auto& [tier, per_pol] : queries) {
    o << tier_name(tier) << ":";
    std::optional<double> best;
    std::vector<PolicyKind> winners;
    for (auto p : pols) {
      auto it = per_pol.find(p);
      if (it == per_pol.end())
        continue;
      o << "  " << policy_name(p) << " median=";
      if (it->second.empty()) {
        o << "n/a";
      } else {
        const double m = median(it->second);
        o << fmt(m, 1);
        if (!best || m < *best) {
          best = m;
          winners = {p};
        } else if (m == *best) {
          winners.push_back(p);
        }
      }
      o << " dnf=" << dnfs[tier][p] << " correct=" << correct[tier][p];
    }
    o << "\n  lowest median queries: ";
    if (winners.empty())
      o << "none (no policy converged)";
    for (std::size_t i = 0; i < winners.size(); ++i)
      o << (i ? ", " : "") << policy_name(winners[i]);
    o << "\n";
  }
  return o.str();
}

std::string mismatch_summary(const MismatchReport& report) {
  std::ostringstream o;
  if (report.events_by_policy.empty()) {
    o << "no rejuvenations recorded\n";
  } else {
    for (const auto& [pol, rate] : report.mean_consistent_rate_by_policy)
      o << "  " << pad(std::string(policy_name(pol)), 8) << " mean consistent rate " << fmt(rate, 4) << " over "
        << report.events_by_policy.at(pol) << " rejuvenations\n";
  }
  for (const auto& [pol, rate] : report.dnf_rate_by_policy)
    o << "  " << pad(std::string(policy_name(pol)), 8) << " DNF rate " << fmt(rate, 4) << "\n";
  return o.str();
}

} // namespace numgame
