#include "numgame/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "numgame/error.hpp"

namespace numgame {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_nonempty(const ParticleSet& ps, const char* op) {
  if (ps.empty())
    throw StateError(std::string(op) + " is undefined on the empty posterior");
}

} // namespace

void PriorConfig::validate() const {
  if (!std::isfinite(lambda) || lambda <= 0.0)
    throw UsageError("prior lambda must be finite and positive");
}

ParticleSet::ParticleSet(InstanceSpace space, std::vector<Particle> particles)
    : space_(space), particles_(std::move(particles)) {
  for (const auto& p : particles_) {
    if (!p.hypothesis)
      throw DomainError("particle without a hypothesis");
    if (!(p.hypothesis->extension().space() == space_))
      throw DomainError("particle hypothesis bound to a different instance space");
    if (!std::isfinite(p.weight) || p.weight < 0.0)
      throw DomainError("particle weight must be finite and non-negative");
  }
}

ParticleSet ParticleSet::uniform(InstanceSpace space, const std::vector<dsl::HypothesisPtr>& hyps) {
  std::vector<Particle> ps;
  ps.reserve(hyps.size());
  for (const auto& h : hyps)
    ps.push_back({h, 1.0 / static_cast<double>(hyps.size())});
  return ParticleSet(space, std::move(ps));
}

std::vector<double> ParticleSet::weights() const {
  std::vector<double> w;
  w.reserve(particles_.size());
  for (const auto& p : particles_)
    w.push_back(p.weight);
  return w;
}

double ParticleSet::total_weight() const noexcept {
  double s = 0.0;
  for (const auto& p : particles_)
    s += p.weight;
  return s;
}

ParticleSet ParticleSet::normalized() const {
  const double total = total_weight();
  std::vector<Particle> out;
  if (total > 0.0) {
    for (const auto& p : particles_)
      if (p.weight > 0.0)
        out.push_back({p.hypothesis, p.weight / total});
  }
  return ParticleSet(space_, std::move(out));
}

bool consistent_with(const dsl::Hypothesis& h, const Dataset& data) {
  for (const auto& ex : data) {
    require_in_space(h.extension().space(), ex.x);
    if (h.contains(ex.x) != ex.y)
      return false;
  }
  return true;
}

double log_likelihood(const dsl::Hypothesis& h, const Dataset& data) {
  if (!consistent_with(h, data))
    return kNegInf;
  const auto positives = count_positives(data);
  if (positives == 0)
    return 0.0;
  if (h.extension().empty())
    return kNegInf;
  return -static_cast<double>(positives) * std::log(static_cast<double>(h.extension().size()));
}

double likelihood(const dsl::Hypothesis& h, const Dataset& data) { return std::exp(log_likelihood(h, data)); }

double log_prior(const dsl::Hypothesis& h, const PriorConfig& cfg) {
  if (cfg.use_backend_score && h.backend_prior_score())
    return *h.backend_prior_score();
  return -cfg.lambda * static_cast<double>(h.desc_len());
}

double prior(const dsl::Hypothesis& h, const PriorConfig& cfg) { return std::exp(log_prior(h, cfg)); }

ParticleSet reweight_all(const ParticleSet& ps, const Dataset& data, const PriorConfig& cfg) {
  require_nonempty(ps, "reweight_all");
  std::vector<double> logw;
  logw.reserve(ps.size());
  double max_logw = kNegInf;
  for (const auto& p : ps.particles()) {
    const double lw = log_likelihood(*p.hypothesis, data) + log_prior(*p.hypothesis, cfg);
    logw.push_back(lw);
    max_logw = std::max(max_logw, lw);
  }
  if (max_logw == kNegInf)
    return ParticleSet(ps.space());

  std::vector<Particle> out;
  double total = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (logw[i] == kNegInf)
      continue;
    const double w = std::exp(logw[i] - max_logw);
    out.push_back({ps.particles()[i].hypothesis, w});
    total += w;
  }
  for (auto& p : out)
    p.weight /= total;
  return ParticleSet(ps.space(), std::move(out));
}

ParticleSet bayes_step(const ParticleSet& ps, const LabeledExample& obs) {
  require_in_space(ps.space(), obs.x);
  std::vector<Particle> out;
  for (const auto& p : ps.particles())
    if (p.hypothesis->contains(obs.x) == obs.y && p.weight > 0.0)
      out.push_back(p);
  return ParticleSet(ps.space(), std::move(out)).normalized();
}

double predictive(const ParticleSet& ps, Instance x) {
  require_nonempty(ps, "predictive");
  require_in_space(ps.space(), x);
  double p1 = 0.0;
  for (const auto& p : ps.particles())
    if (p.hypothesis->contains(x))
      p1 += p.weight;
  return std::clamp(p1, 0.0, 1.0);
}

double entropy_bits(const std::vector<double>& weights) noexcept {
  double h = 0.0;
  for (double w : weights)
    if (w > 0.0)
      h -= w * std::log2(w);
  return std::max(h, 0.0);
}

double entropy(const ParticleSet& ps) {
  require_nonempty(ps, "entropy");
  return entropy_bits(ps.weights());
}

double ess(const ParticleSet& ps) {
  require_nonempty(ps, "ess");
  double sq = 0.0;
  for (const auto& p : ps.particles())
    sq += p.weight * p.weight;
  return 1.0 / sq;
}

ParticleSet merge_dedup(const ParticleSet& ps, const std::vector<dsl::HypothesisPtr>& new_hyps) {
  std::vector<Particle> out;
  std::unordered_map<Extension, std::size_t, ExtensionHash> index;
  auto add = [&](const dsl::HypothesisPtr& h, double w) {
    auto [it, inserted] = index.emplace(h->extension(), out.size());
    if (inserted) {
      out.push_back({h, w});
      return;
    }
    Particle& held = out[it->second];
    if (dsl::simpler_than(*h, *held.hypothesis))
      held.hypothesis = h;
    held.weight = std::max(held.weight, w);
  };
  for (const auto& p : ps.particles())
    add(p.hypothesis, p.weight);
  for (const auto& h : new_hyps) {
    if (!(h->extension().space() == ps.space()))
      throw DomainError("merged hypothesis bound to a different instance space");
    add(h, 0.0);
  }
  return ParticleSet(ps.space(), std::move(out));
}

MapEstimate map_confidence(const ParticleSet& ps) {
  require_nonempty(ps, "map_confidence");
  // Mass is pooled per extension so that duplicate spellings of one concept count once.
  std::vector<Particle> concepts;
  std::unordered_map<Extension, std::size_t, ExtensionHash> index;
  for (const auto& p : ps.particles()) {
    auto [it, inserted] = index.emplace(p.hypothesis->extension(), concepts.size());
    if (inserted) {
      concepts.push_back(p);
      continue;
    }
    Particle& c = concepts[it->second];
    c.weight += p.weight;
    if (dsl::simpler_than(*p.hypothesis, *c.hypothesis))
      c.hypothesis = p.hypothesis;
  }
  const bool any_nonempty = std::any_of(concepts.begin(), concepts.end(),
                                        [](const Particle& p) { return !p.hypothesis->extension().empty(); });
  const Particle* best = nullptr;
  for (const auto& p : concepts) {
    if (any_nonempty && p.hypothesis->extension().empty())
      continue;
    if (!best) {
      best = &p;
      continue;
    }
    const double tol = 1e-12 * std::max(p.weight, best->weight);
    if (p.weight > best->weight + tol ||
        (std::abs(p.weight - best->weight) <= tol && dsl::simpler_than(*p.hypothesis, *best->hypothesis)))
      best = &p;
  }
  return {best->hypothesis, best->weight / ps.total_weight()};
}

ParticleSet truncate(const ParticleSet& ps, std::size_t n) {
  if (ps.size() <= n)
    return ps.normalized();
  std::vector<Particle> sorted = ps.particles();
  std::stable_sort(sorted.begin(), sorted.end(), [](const Particle& a, const Particle& b) {
    if (a.weight != b.weight)
      return a.weight > b.weight;
    return dsl::simpler_than(*a.hypothesis, *b.hypothesis);
  });
  sorted.resize(n);
  return ParticleSet(ps.space(), std::move(sorted)).normalized();
}

double mass_on(const ParticleSet& ps, const Extension& ext) noexcept {
  double m = 0.0;
  for (const auto& p : ps.particles())
    if (p.hypothesis->extension() == ext)
      m += p.weight;
  return m;
}

} // namespace numgame
