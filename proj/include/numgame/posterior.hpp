#pragma once

#include <cstddef>
#include <vector>

#include "numgame/dsl.hpp"
#include "numgame/space.hpp"

namespace numgame {

struct Particle {
  dsl::HypothesisPtr hypothesis;
  double weight = 0.0;
};

/// Strength of the description-length prior and whether backend scores override it.
struct PriorConfig {
  double lambda = 0.1;
  bool use_backend_score = true;

  void validate() const;
};

/// Weighted particle approximation of the posterior over hypotheses.
///
/// Immutable snapshot: every operation below returns a new set. An empty set is the
/// "empty-posterior" state reached when every particle has been falsified.
class ParticleSet {
public:
  ParticleSet() = default;
  explicit ParticleSet(InstanceSpace space, std::vector<Particle> particles = {});

  /// Equal weights over the given hypotheses.
  static ParticleSet uniform(InstanceSpace space, const std::vector<dsl::HypothesisPtr>& hyps);

  const InstanceSpace& space() const noexcept { return space_; }
  const std::vector<Particle>& particles() const noexcept { return particles_; }
  std::size_t size() const noexcept { return particles_.size(); }
  bool empty() const noexcept { return particles_.empty(); }

  std::vector<double> weights() const;
  double total_weight() const noexcept;

  /// Drops zero-weight particles and rescales the rest to sum to one.
  ParticleSet normalized() const;

private:
  InstanceSpace space_{};
  std::vector<Particle> particles_;
};

/// Size-principle likelihood with a hard consistency indicator: (1/|h|)^P, or 0 if h
/// contradicts any example. Empty extensions get 0 whenever a positive is present.
double likelihood(const dsl::Hypothesis& h, const Dataset& data);
double log_likelihood(const dsl::Hypothesis& h, const Dataset& data);

bool consistent_with(const dsl::Hypothesis& h, const Dataset& data);

/// exp(backend score) when available and enabled, else exp(-lambda * desc_len).
double prior(const dsl::Hypothesis& h, const PriorConfig& cfg);
double log_prior(const dsl::Hypothesis& h, const PriorConfig& cfg);

ParticleSet reweight_all(const ParticleSet& ps, const Dataset& data, const PriorConfig& cfg);

/// Zeroes particles inconsistent with obs and renormalizes.
ParticleSet bayes_step(const ParticleSet& ps, const LabeledExample& obs);

/// p(y = 1 | x) under the particle posterior.
double predictive(const ParticleSet& ps, Instance x);

/// Shannon entropy of the weights, in bits.
double entropy(const ParticleSet& ps);
double entropy_bits(const std::vector<double>& weights) noexcept;

double ess(const ParticleSet& ps);

/// Union of the current particles and new hypotheses, deduplicated by extension.
/// On collision the simpler hypothesis wins; weights are left for reweight_all.
ParticleSet merge_dedup(const ParticleSet& ps, const std::vector<dsl::HypothesisPtr>& new_hyps);

struct MapEstimate {
  dsl::HypothesisPtr hypothesis;
  double confidence = 0.0;
};

MapEstimate map_confidence(const ParticleSet& ps);

/// Keeps the n heaviest particles (ties to the simpler hypothesis) and renormalizes.
ParticleSet truncate(const ParticleSet& ps, std::size_t n);

/// Total weight of particles whose extension equals ext.
double mass_on(const ParticleSet& ps, const Extension& ext) noexcept;

} // namespace numgame
