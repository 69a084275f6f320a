#include "numgame/policies.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "numgame/error.hpp"

namespace numgame {

namespace {

// Scores closer than this are ties, resolved toward the smaller instance.
constexpr double kScoreTieTolerance = 1e-12;

std::vector<Instance> unqueried(const QueryContext& ctx) {
  std::vector<Instance> out;
  for (Instance x = ctx.space.lo; x <= ctx.space.hi; ++x)
    if (!ctx.queried.count(x))
      out.push_back(x);
  if (out.empty())
    throw DomainError("every instance has already been queried");
  return out;
}

Instance uniform_pick(const std::vector<Instance>& xs, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
  return xs[pick(rng)];
}

double conditional_entropy(const ParticleSet& ps, Instance x, bool y, double mass) {
  std::vector<double> w;
  for (const auto& p : ps.particles())
    if (p.hypothesis->contains(x) == y)
      w.push_back(p.weight / mass);
  return entropy_bits(w);
}

} // namespace

std::string_view policy_name(PolicyKind p) noexcept {
  switch (p) {
  case PolicyKind::EIG:
    return "eig";
  case PolicyKind::PTS:
    return "pts";
  case PolicyKind::Passive:
    return "passive";
  }
  return "passive";
}

PolicyKind policy_from_name(std::string_view name) {
  std::string l(name);
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (l == "eig")
    return PolicyKind::EIG;
  if (l == "pts")
    return PolicyKind::PTS;
  if (l == "passive" || l == "rand")
    return PolicyKind::Passive;
  throw UsageError("unknown policy '" + std::string(name) + "' (valid: eig, pts, passive)");
}

double binary_entropy(double p) noexcept {
  if (p <= 0.0 || p >= 1.0)
    return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double eig_score(const ParticleSet& ps, Instance x) {
  const double h_now = entropy(ps);
  const double p1 = predictive(ps, x);
  const double p0 = 1.0 - p1;
  double expected = 0.0;
  if (p1 > 0.0)
    expected += p1 * conditional_entropy(ps, x, true, p1);
  if (p0 > 0.0)
    expected += p0 * conditional_entropy(ps, x, false, p0);
  return std::clamp(h_now - expected, 0.0, h_now);
}

double eig_fast(const ParticleSet& ps, Instance x) { return binary_entropy(predictive(ps, x)); }

Instance select_eig(const QueryContext& ctx) {
  const auto candidates = unqueried(ctx);
  Instance best = candidates.front();
  double best_score = eig_fast(ctx.ps, best);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double s = eig_fast(ctx.ps, candidates[i]);
    if (s > best_score + kScoreTieTolerance) {
      best = candidates[i];
      best_score = s;
    }
  }
  return best;
}

QueryChoice select_pts(const QueryContext& ctx) {
  const auto candidates = unqueried(ctx);
  const auto map = map_confidence(ctx.ps);
  std::vector<Instance> positives;
  for (Instance x : candidates)
    if (map.hypothesis->contains(x))
      positives.push_back(x);
  if (positives.empty())
    return {uniform_pick(candidates, ctx.rng), true};
  return {uniform_pick(positives, ctx.rng), false};
}

Instance select_passive(const QueryContext& ctx) { return uniform_pick(unqueried(ctx), ctx.rng); }

QueryChoice select_query(PolicyKind kind, const QueryContext& ctx) {
  switch (kind) {
  case PolicyKind::EIG:
    return {select_eig(ctx), false};
  case PolicyKind::PTS:
    return select_pts(ctx);
  case PolicyKind::Passive:
    return {select_passive(ctx), false};
  }
  return {select_passive(ctx), false};
}

} // namespace numgame
