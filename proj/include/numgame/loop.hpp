#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "numgame/concepts.hpp"
#include "numgame/policies.hpp"
#include "numgame/posterior.hpp"
#include "numgame/proposals.hpp"

namespace numgame {

struct RunConfig {
  int budget = 50;
  int particles = 20;
  double conf_threshold = 0.95;
  /// Rejuvenate when ESS drops below ess_frac * particles.
  double ess_frac = 0.5;
  /// Proposals per rejuvenation; 0 means 2 * particles.
  int rejuv_batch = 0;
  int rejuv_retries = 3;
  std::uint64_t seed = 0;
  PolicyKind policy = PolicyKind::EIG;
  bool seed_positive = true;
  PriorConfig prior;

  int effective_rejuv_batch() const noexcept { return rejuv_batch > 0 ? rejuv_batch : 2 * particles; }
  void validate() const;
};

/// One row of a learning trajectory. Row t = 0 records the revealed seed positive and
/// the initial proposal round; rows t >= 1 are policy-selected queries.
struct IterationRecord {
  int t = 0;
  Instance query = 0;
  bool label = false;
  std::string map_text;
  double map_confidence = 0.0;
  double ess_before = 0.0;
  double ess_after = 0.0;
  bool rejuvenated = false;
  std::optional<ProposalStats> proposal_stats;
  double nll_true = 0.0;
  bool pts_exhausted = false;
  bool generator_failure = false;
  /// Query chosen passively because the posterior was empty.
  bool passive_fallback = false;
  /// EIG was zero for every candidate; the smallest unqueried instance was taken.
  bool eig_degenerate = false;
  std::vector<std::pair<std::string, double>> particles;
};

enum class OutcomeKind { Converged, DNF, Aborted };

std::string_view outcome_name(OutcomeKind k) noexcept;

struct Outcome {
  OutcomeKind kind = OutcomeKind::DNF;
  int queries = 0;
  bool correct = false;
  std::string abort_reason;
};

struct RunRecord {
  RunConfig config;
  std::string concept_id;
  Tier tier = Tier::Easy;
  std::string backend;
  std::vector<IterationRecord> iterations;
  Outcome outcome;
};

/// −log2 of the mass on the target's extension, capped at −log2(1e−9) bits.
double nll_true(const ParticleSet& ps, const TargetConcept& target);

inline constexpr double kNllMassFloor = 1e-9;
double nll_cap() noexcept;

struct RejuvenationResult {
  ParticleSet ps;
  ProposalStats stats;
  bool generator_failure = false;
};

/// Requests fresh proposals for the full dataset, merges them with the survivors,
/// reweights everything and keeps the cfg.particles heaviest. Retries while the merged
/// set is empty; generator_failure is set if it stays empty.
RejuvenationResult rejuvenate(const ParticleSet& ps, const Dataset& data, const RunConfig& cfg,
                              ProposalBackend& backend, int round, int batch_size);

RunRecord run_trial(const TargetConcept& target, const RunConfig& cfg, ProposalBackend& backend);

} // namespace numgame
