#pragma once

#include <set>
#include <string_view>

#include "numgame/posterior.hpp"
#include "numgame/space.hpp"
#include "numgame/util.hpp"

namespace numgame {

enum class PolicyKind { EIG, PTS, Passive };

std::string_view policy_name(PolicyKind p) noexcept;
/// Accepts "eig", "pts", "passive" (also "rand"), case-insensitively.
PolicyKind policy_from_name(std::string_view name);

struct QueryContext {
  const ParticleSet& ps;
  const std::set<Instance>& queried;
  InstanceSpace space;
  Rng& rng;
};

struct QueryChoice {
  Instance x = 0;
  bool pts_exhausted = false;
};

/// Expected reduction in posterior entropy (bits) from querying x, computed by
/// conditioning the particle weights on both labels.
double eig_score(const ParticleSet& ps, Instance x);

/// Binary entropy of the predictive at x; equals eig_score for 0/1 likelihoods.
double eig_fast(const ParticleSet& ps, Instance x);

double binary_entropy(double p) noexcept;

/// Unqueried instance with the largest EIG; smallest x among ties.
Instance select_eig(const QueryContext& ctx);

/// Uniform draw from unqueried positives of the MAP hypothesis, falling back to
/// passive selection (and flagging it) when none remain.
QueryChoice select_pts(const QueryContext& ctx);

Instance select_passive(const QueryContext& ctx);

QueryChoice select_query(PolicyKind kind, const QueryContext& ctx);

} // namespace numgame
