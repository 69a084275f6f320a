#include "numgame/loop.hpp"

#include <cmath>
#include <set>
#include <unordered_set>

#include "numgame/error.hpp"

namespace numgame {

namespace {

// EIG values at or below this count as "no information".
constexpr double kZeroEig = 1e-12;

std::vector<std::pair<std::string, double>> snapshot(const ParticleSet& ps) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(ps.size());
  for (const auto& p : ps.particles())
    out.emplace_back(p.hypothesis->text(), p.weight);
  return out;
}

Rng trial_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6e67u};
  return Rng(seq);
}

} // namespace

std::string_view outcome_name(OutcomeKind k) noexcept {
  switch (k) {
  case OutcomeKind::Converged:
    return "converged";
  case OutcomeKind::DNF:
    return "dnf";
  case OutcomeKind::Aborted:
    return "aborted";
  }
  return "dnf";
}

void RunConfig::validate() const {
  if (budget < 1)
    throw UsageError("budget must be at least 1");
  if (particles < 1)
    throw UsageError("particle count must be at least 1");
  if (!(conf_threshold > 0.5 && conf_threshold <= 1.0))
    throw UsageError("confidence threshold must lie in (0.5, 1]");
  if (!(ess_frac > 0.0 && ess_frac <= 1.0))
    throw UsageError("ess fraction must lie in (0, 1]");
  if (rejuv_batch < 0 || effective_rejuv_batch() > kDefaultMaxProposals)
    throw UsageError("rejuvenation batch must lie in [1, " + std::to_string(kDefaultMaxProposals) + "]");
  if (rejuv_retries < 0)
    throw UsageError("rejuvenation retries must be non-negative");
  prior.validate();
}

double nll_cap() noexcept { return -std::log2(kNllMassFloor); }

double nll_true(const ParticleSet& ps, const TargetConcept& target) {
  const double mass = mass_on(ps, target.extension());
  if (mass < kNllMassFloor)
    return nll_cap();
  return std::max(0.0, 0.0 - std::log2(mass));
}

RejuvenationResult rejuvenate(const ParticleSet& ps, const Dataset& data, const RunConfig& cfg,
                              ProposalBackend& backend, int round, int batch_size) {
  RejuvenationResult out{ps, {}, false};
  for (int attempt = 0; attempt <= cfg.rejuv_retries; ++attempt) {
    ProposalRequest req{data, ps.space(), batch_size, round, attempt};
    ProposalBatch batch = generate(backend, req);

    std::unordered_set<Extension, ExtensionHash> held;
    for (const auto& p : out.ps.particles())
      held.insert(p.hypothesis->extension());
    int novel = 0;
    for (const auto& h : batch.parsed_ok)
      novel += held.count(h->extension()) ? 0 : 1;
    batch.stats.novel_extensions = novel;
    out.stats += batch.stats;

    ParticleSet merged = merge_dedup(out.ps, batch.parsed_ok);
    if (!merged.empty()) {
      ParticleSet reweighted = reweight_all(merged, data, cfg.prior);
      if (!reweighted.empty()) {
        out.ps = truncate(reweighted, static_cast<std::size_t>(cfg.particles));
        return out;
      }
    }
  }
  out.ps = ParticleSet(ps.space());
  out.generator_failure = true;
  return out;
}

RunRecord run_trial(const TargetConcept& target, const RunConfig& cfg, ProposalBackend& backend) {
  cfg.validate();
  RunRecord rec;
  rec.config = cfg;
  rec.concept_id = target.id;
  rec.tier = target.tier;
  rec.backend = backend.name();

  const InstanceSpace space = target.extension().space();
  Rng rng = trial_rng(cfg.seed);
  Dataset data;
  std::set<Instance> queried;
  ParticleSet ps(space);
  const double ess_floor = cfg.ess_frac * cfg.particles;

  auto converged = [&](int queries) {
    if (ps.empty())
      return false;
    const auto map = map_confidence(ps);
    if (map.confidence < cfg.conf_threshold)
      return false;
    rec.outcome = {OutcomeKind::Converged, queries, map.hypothesis->extension() == target.extension(), {}};
    return true;
  };

  auto fill_summary = [&](IterationRecord& row) {
    if (!ps.empty()) {
      const auto map = map_confidence(ps);
      row.map_text = map.hypothesis->text();
      row.map_confidence = map.confidence;
    }
    row.nll_true = nll_true(ps, target);
    row.particles = snapshot(ps);
  };

  try {
    IterationRecord init;
    if (cfg.seed_positive) {
      const auto members = target.extension().members();
      std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
      const Instance x0 = members[pick(rng)];
      data.push_back({x0, true});
      queried.insert(x0);
      init.query = x0;
      init.label = true;
    }
    auto first = rejuvenate(ps, data, cfg, backend, 0, cfg.particles);
    ps = first.ps;
    init.proposal_stats = first.stats;
    init.generator_failure = first.generator_failure;
    init.ess_after = ps.empty() ? 0.0 : ess(ps);
    fill_summary(init);
    if (cfg.seed_positive)
      rec.iterations.push_back(init);
    if (converged(0))
      return rec;

    for (int t = 1; t <= cfg.budget; ++t) {
      if (queried.size() >= space.size())
        break;
      IterationRecord row;
      row.t = t;
      QueryContext ctx{ps, queried, space, rng};
      QueryChoice choice;
      if (ps.empty()) {
        choice = {select_passive(ctx), false};
        row.passive_fallback = true;
      } else {
        choice = select_query(cfg.policy, ctx);
        if (cfg.policy == PolicyKind::EIG && eig_fast(ps, choice.x) <= kZeroEig)
          row.eig_degenerate = true;
      }
      row.pts_exhausted = choice.pts_exhausted;
      row.query = choice.x;
      row.label = oracle_label(target, choice.x);
      queried.insert(choice.x);
      data.push_back({choice.x, row.label});

      if (!ps.empty())
        ps = bayes_step(ps, data.back());
      row.ess_before = ps.empty() ? 0.0 : ess(ps);
      if (ps.empty() || row.ess_before < ess_floor) {
        auto r = rejuvenate(ps, data, cfg, backend, t, cfg.effective_rejuv_batch());
        ps = r.ps;
        row.rejuvenated = true;
        row.proposal_stats = r.stats;
        row.generator_failure = r.generator_failure;
      }
      row.ess_after = ps.empty() ? 0.0 : ess(ps);
      fill_summary(row);
      rec.iterations.push_back(std::move(row));
      if (converged(t))
        return rec;
    }
    rec.outcome = {OutcomeKind::DNF, 0, false, {}};
  } catch (const BackendUnavailable& ex) {
    rec.outcome = {OutcomeKind::Aborted, 0, false, ex.what()};
  }
  return rec;
}

} // namespace numgame
