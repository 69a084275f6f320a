#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "numgame/dsl.hpp"
#include "numgame/space.hpp"
#include "numgame/util.hpp"

namespace numgame {

inline constexpr int kDefaultMaxProposals = 64;

/// What a backend is asked for: candidates conditioned on the current dataset.
struct ProposalRequest {
  Dataset data;
  InstanceSpace space{};
  int num_proposals = 16;
  int round = 0;
  /// Retry index within a round; lets a backend return fresh candidates on retry.
  int attempt = 0;

  void validate(int max_proposals = kDefaultMaxProposals) const;
};

/// Counts at each stage of the proposal sieve.
struct ProposalStats {
  int requested = 0;
  int returned = 0;
  int parse_valid = 0;
  int consistent = 0;
  int novel_extensions = 0;

  ProposalStats& operator+=(const ProposalStats& o);
  friend bool operator==(const ProposalStats&, const ProposalStats&) = default;
};

struct ProposalBatch {
  std::vector<std::string> raw_texts;
  std::vector<dsl::HypothesisPtr> parsed_ok;
  ProposalStats stats;
};

/// Unfiltered backend output; scores, when present, align with texts.
struct RawProposals {
  std::vector<std::string> texts;
  std::vector<std::optional<double>> scores;
};

struct FilterResult {
  std::vector<dsl::HypothesisPtr> hypotheses;
  ProposalStats stats;
};

/// Three-stage sieve: parse, consistency with data, nonempty extension. Within the
/// batch, duplicate extensions collapse to the simplest text.
FilterResult filter(const std::vector<std::string>& raw_texts, const Dataset& data, const InstanceSpace& space,
                    const std::vector<std::optional<double>>& scores = {});

/// Source of candidate hypothesis texts.
class ProposalBackend {
public:
  virtual ~ProposalBackend() = default;
  virtual RawProposals propose(const ProposalRequest& req) = 0;
  virtual std::string name() const = 0;
};

/// Generator contract: asks the backend, then applies filter() so that every
/// backend's output obeys the same postconditions.
ProposalBatch generate(ProposalBackend& backend, const ProposalRequest& req);

// ---------------------------------------------------------------------------
// Grammar sampler

struct ParamRange {
  int lo = 0;
  int hi = 0;
};

enum class DatasetFeature { BoundaryNegatives, Negatives, Positives, Examples };

std::string_view feature_name(DatasetFeature f) noexcept;

/// failure probability contributed by one feature: clamp(base + slope * value, 0, cap).
struct DegradationRule {
  DatasetFeature feature = DatasetFeature::BoundaryNegatives;
  double base = 0.0;
  double slope = 0.0;
  double cap = 1.0;
};

/// What the grammar backend can propose and how its reliability degrades.
struct SupportProfile {
  std::string name = "full";
  std::set<dsl::AtomKind> allowed_atoms;
  std::map<dsl::AtomKind, double> atom_weights;
  int max_depth = 3;
  bool boolean_combinators_enabled = true;
  // Probability of a combinator at the root; multiplied by combinator_decay per level.
  double combinator_prob = 0.05;
  double combinator_decay = 0.5;
  double not_weight = 1.0;
  double and_weight = 2.0;
  double or_weight = 1.0;
  double shift_weight = 0.5;

  ParamRange modulus{2, 12};
  ParamRange threshold{1, 100};
  ParamRange digit_sum{1, 18};
  ParamRange base{2, 6};
  ParamRange offset{-3, 3};
  int max_set_size = 3;

  /// Grammar draws per proposal slot while searching for a data-consistent program.
  int max_attempts = 100;

  std::vector<DegradationRule> degradation;
  int boundary_distance = 1;
  /// Share of degraded slots emitted as unparseable text (the rest are inconsistent programs).
  double malformed_share = 0.5;

  void validate() const;
  double atom_weight(dsl::AtomKind k) const;
  double failure_probability(const Dataset& data) const;
};

double dataset_feature(DatasetFeature f, const Dataset& data, int boundary_distance);

/// Built-in profiles: "full", "degraded", "no_prime".
SupportProfile builtin_profile(std::string_view name);
std::vector<std::string> builtin_profile_names();

SupportProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const SupportProfile& p);
/// A built-in name or a path to a JSON profile.
SupportProfile load_profile(const std::string& name_or_path);

/// One top-down draw from the profile's grammar.
dsl::Expr sample_expr(const SupportProfile& profile, Rng& rng);

/// Raw texts for a request; deterministic given (profile, req, seed).
RawProposals grammar_propose(const SupportProfile& profile, const ProposalRequest& req, std::uint64_t seed);

ProposalBatch grammar_sample(const SupportProfile& profile, const ProposalRequest& req, std::uint64_t seed);

class GrammarBackend : public ProposalBackend {
public:
  GrammarBackend(SupportProfile profile, std::uint64_t seed);
  RawProposals propose(const ProposalRequest& req) override;
  std::string name() const override { return "grammar"; }
  const SupportProfile& profile() const noexcept { return profile_; }

private:
  SupportProfile profile_;
  std::uint64_t seed_;
};

/// Returns pre-scripted texts: call i gets rounds[min(i, last)].
class ScriptedBackend : public ProposalBackend {
public:
  explicit ScriptedBackend(std::vector<std::vector<std::string>> rounds);
  RawProposals propose(const ProposalRequest& req) override;
  std::string name() const override { return "scripted"; }
  int calls() const noexcept { return calls_; }

private:
  std::vector<std::vector<std::string>> rounds_;
  int calls_ = 0;
};

class CallbackBackend : public ProposalBackend {
public:
  using Fn = std::function<RawProposals(const ProposalRequest&)>;
  explicit CallbackBackend(Fn fn, std::string name = "callback");
  RawProposals propose(const ProposalRequest& req) override { return fn_(req); }
  std::string name() const override { return name_; }

private:
  Fn fn_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// LLM backend

inline constexpr const char* kPromptTemplateVersion = "numgame-prompt-v1";

struct LlmConfig {
  std::string endpoint;  // http(s)://host[:port]/path
  std::string auth_token;
  std::string model;
  double timeout_s = 30.0;
  int retries = 3;
  int backoff_ms = 500;
  std::filesystem::path cache_dir = "cache";
  bool use_cache = true;
  /// Serve from the cache only; a miss is a BackendUnavailable error.
  bool replay_only = false;

  /// Reads NUMGAME_LLM_URL, NUMGAME_LLM_TOKEN and NUMGAME_LLM_MODEL.
  static LlmConfig from_env();
};

std::string render_prompt(const ProposalRequest& req);

/// Canonical request description; examples are sorted so the key ignores their order.
nlohmann::json request_key(const LlmConfig& cfg, const ProposalRequest& req);
std::string request_hash(const LlmConfig& cfg, const ProposalRequest& req);

/// One candidate per non-empty line; code-fence lines are dropped.
std::vector<std::string> extract_candidates(std::string_view response_text, std::size_t max_candidates);

class LlmBackend : public ProposalBackend {
public:
  explicit LlmBackend(LlmConfig cfg);
  RawProposals propose(const ProposalRequest& req) override;
  std::string name() const override { return "llm"; }

  int network_calls() const noexcept { return network_calls_.load(); }
  int cache_hits() const noexcept { return cache_hits_.load(); }

private:
  struct Response {
    std::string text;
    std::vector<std::optional<double>> scores;
  };
  Response fetch(const nlohmann::json& body);

  LlmConfig cfg_;
  std::atomic<int> network_calls_{0};
  std::atomic<int> cache_hits_{0};
};

ProposalBatch llm_generate(LlmBackend& backend, const ProposalRequest& req);

} // namespace numgame
