#include "numgame/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <unordered_map>

#include "numgame/error.hpp"
#include "numgame/posterior.hpp"

namespace numgame {

using dsl::AtomKind;
using dsl::Expr;

void ProposalRequest::validate(int max_proposals) const {
  if (num_proposals < 1 || num_proposals > max_proposals)
    throw UsageError("num_proposals must lie in [1, " + std::to_string(max_proposals) + "], got " +
                     std::to_string(num_proposals));
  for (const auto& ex : data)
    require_in_space(space, ex.x);
}

ProposalStats& ProposalStats::operator+=(const ProposalStats& o) {
  requested += o.requested;
  returned += o.returned;
  parse_valid += o.parse_valid;
  consistent += o.consistent;
  novel_extensions += o.novel_extensions;
  return *this;
}

FilterResult filter(const std::vector<std::string>& raw_texts, const Dataset& data, const InstanceSpace& space,
                    const std::vector<std::optional<double>>& scores) {
  FilterResult out;
  out.stats.requested = static_cast<int>(raw_texts.size());
  out.stats.returned = static_cast<int>(raw_texts.size());
  std::unordered_map<Extension, std::size_t, ExtensionHash> seen;
  for (std::size_t i = 0; i < raw_texts.size(); ++i) {
    dsl::HypothesisPtr h;
    try {
      h = dsl::Hypothesis::from_text(raw_texts[i], space, i < scores.size() ? scores[i] : std::nullopt);
    } catch (const dsl::ParseError&) {
      continue;
    }
    ++out.stats.parse_valid;
    if (h->extension().empty() || !consistent_with(*h, data))
      continue;
    ++out.stats.consistent;
    auto [it, inserted] = seen.emplace(h->extension(), out.hypotheses.size());
    if (inserted)
      out.hypotheses.push_back(std::move(h));
    else if (dsl::simpler_than(*h, *out.hypotheses[it->second]))
      out.hypotheses[it->second] = std::move(h);
  }
  out.stats.novel_extensions = static_cast<int>(out.hypotheses.size());
  return out;
}

ProposalBatch generate(ProposalBackend& backend, const ProposalRequest& req) {
  req.validate();
  RawProposals raw = backend.propose(req);
  const auto limit = static_cast<std::size_t>(req.num_proposals);
  if (raw.texts.size() > limit)
    raw.texts.resize(limit);
  if (raw.scores.size() > raw.texts.size())
    raw.scores.resize(raw.texts.size());
  auto filtered = filter(raw.texts, req.data, req.space, raw.scores);
  ProposalBatch batch;
  batch.raw_texts = std::move(raw.texts);
  batch.parsed_ok = std::move(filtered.hypotheses);
  batch.stats = filtered.stats;
  batch.stats.requested = req.num_proposals;
  return batch;
}

// ---------------------------------------------------------------------------
// Support profiles

std::string_view feature_name(DatasetFeature f) noexcept {
  switch (f) {
  case DatasetFeature::BoundaryNegatives:
    return "boundary_negatives";
  case DatasetFeature::Negatives:
    return "negatives";
  case DatasetFeature::Positives:
    return "positives";
  case DatasetFeature::Examples:
    return "examples";
  }
  return "examples";
}

namespace {

DatasetFeature feature_from_name(const std::string& s) {
  for (auto f : {DatasetFeature::BoundaryNegatives, DatasetFeature::Negatives, DatasetFeature::Positives,
                 DatasetFeature::Examples})
    if (feature_name(f) == s)
      return f;
  throw UsageError("unknown dataset feature '" + s + "'");
}

void check_range(const ParamRange& r, int lo, int hi, const char* what) {
  if (r.lo > r.hi || r.lo < lo || r.hi > hi)
    throw UsageError(std::string("profile range '") + what + "' must satisfy " + std::to_string(lo) +
                     " <= lo <= hi <= " + std::to_string(hi));
}

bool unit_interval(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

} // namespace

double SupportProfile::atom_weight(AtomKind k) const {
  if (!allowed_atoms.count(k))
    return 0.0;
  auto it = atom_weights.find(k);
  return it == atom_weights.end() ? 1.0 : it->second;
}

void SupportProfile::validate() const {
  double total = 0.0;
  for (auto k : allowed_atoms) {
    const double w = atom_weight(k);
    if (!std::isfinite(w) || w < 0.0)
      throw UsageError("atom weights must be finite and non-negative");
    total += w;
  }
  if (total <= 0.0)
    throw UsageError("profile '" + name + "' allows no atom with positive weight");
  if (max_depth < 1 || max_depth > dsl::Limits::kDefaultMaxDepth)
    throw UsageError("profile max_depth must lie in [1, " + std::to_string(dsl::Limits::kDefaultMaxDepth) + "]");
  if (!unit_interval(combinator_prob) || !unit_interval(combinator_decay))
    throw UsageError("combinator probabilities must lie in [0, 1]");
  for (double w : {not_weight, and_weight, or_weight, shift_weight})
    if (!std::isfinite(w) || w < 0.0)
      throw UsageError("combinator weights must be finite and non-negative");
  check_range(modulus, dsl::Limits::kMinModulus, dsl::Limits::kMaxModulus, "modulus");
  check_range(threshold, dsl::Limits::kMinThreshold, dsl::Limits::kMaxThreshold, "threshold");
  check_range(digit_sum, 0, dsl::Limits::kMaxDigitSum, "digit_sum");
  check_range(base, dsl::Limits::kMinBase, dsl::Limits::kMaxBase, "base");
  check_range(offset, -dsl::Limits::kMaxOffset, dsl::Limits::kMaxOffset, "offset");
  if (max_set_size < 1 || max_set_size > dsl::Limits::kMaxSetSize)
    throw UsageError("profile max_set_size out of range");
  if (max_attempts < 1)
    throw UsageError("profile max_attempts must be at least 1");
  if (boundary_distance < 0)
    throw UsageError("profile boundary_distance must be non-negative");
  if (!unit_interval(malformed_share))
    throw UsageError("profile malformed_share must lie in [0, 1]");
  for (const auto& r : degradation)
    if (!unit_interval(r.base) || !unit_interval(r.cap) || !std::isfinite(r.slope))
      throw UsageError("degradation probabilities must lie in [0, 1]");
}

double dataset_feature(DatasetFeature f, const Dataset& data, int boundary_distance) {
  switch (f) {
  case DatasetFeature::Examples:
    return static_cast<double>(data.size());
  case DatasetFeature::Positives:
    return static_cast<double>(count_positives(data));
  case DatasetFeature::Negatives:
    return static_cast<double>(data.size() - count_positives(data));
  case DatasetFeature::BoundaryNegatives: {
    int n = 0;
    for (const auto& neg : data) {
      if (neg.y)
        continue;
      const bool near_positive = std::any_of(data.begin(), data.end(), [&](const LabeledExample& pos) {
        return pos.y && std::abs(pos.x - neg.x) <= boundary_distance;
      });
      n += near_positive ? 1 : 0;
    }
    return n;
  }
  }
  return 0.0;
}

double SupportProfile::failure_probability(const Dataset& data) const {
  double survive = 1.0;
  for (const auto& r : degradation) {
    const double p = std::clamp(r.base + r.slope * dataset_feature(r.feature, data, boundary_distance), 0.0, r.cap);
    survive *= 1.0 - p;
  }
  return 1.0 - survive;
}

SupportProfile builtin_profile(std::string_view name) {
  SupportProfile p;
  p.name = std::string(name);
  for (auto k : dsl::all_atom_kinds())
    if (k != AtomKind::InSet && k != AtomKind::False)
      p.allowed_atoms.insert(k);
  p.atom_weights = {
      {AtomKind::Divisible, 3.0},    {AtomKind::ModEq, 1.0},        {AtomKind::LessThan, 1.0},
      {AtomKind::GreaterThan, 1.0},  {AtomKind::EndsIn, 1.0},       {AtomKind::DigitSumLess, 0.5},
      {AtomKind::DigitSumEq, 0.5},   {AtomKind::Square, 1.0},       {AtomKind::Cube, 0.5},
      {AtomKind::PowerOf, 1.0},      {AtomKind::Prime, 1.0},        {AtomKind::Even, 1.5},
      {AtomKind::Odd, 1.5},          {AtomKind::True, 0.2},
  };
  if (name == "full")
    return p;
  if (name == "degraded") {
    // Each negative sitting next to a known positive makes a proposal slot more
    // likely to come back unparseable or contradicting the data.
    p.degradation.push_back({DatasetFeature::BoundaryNegatives, 0.0, 0.25, 0.9});
    return p;
  }
  if (name == "no_prime") {
    p.allowed_atoms.erase(AtomKind::Prime);
    return p;
  }
  throw UsageError("unknown built-in profile '" + std::string(name) + "' (valid: full, degraded, no_prime)");
}

std::vector<std::string> builtin_profile_names() { return {"full", "degraded", "no_prime"}; }

nlohmann::json profile_to_json(const SupportProfile& p) {
  nlohmann::json j;
  j["name"] = p.name;
  j["allowed_atoms"] = nlohmann::json::array();
  nlohmann::json weights = nlohmann::json::object();
  for (auto k : p.allowed_atoms) {
    j["allowed_atoms"].push_back(std::string(dsl::atom_name(k)));
    weights[std::string(dsl::atom_name(k))] = p.atom_weight(k);
  }
  j["atom_weights"] = weights;
  j["max_depth"] = p.max_depth;
  j["boolean_combinators_enabled"] = p.boolean_combinators_enabled;
  j["combinator_prob"] = p.combinator_prob;
  j["combinator_decay"] = p.combinator_decay;
  j["combinator_weights"] = {{"not", p.not_weight}, {"and", p.and_weight}, {"or", p.or_weight},
                             {"shift", p.shift_weight}};
  auto range = [](const ParamRange& r) { return nlohmann::json::array({r.lo, r.hi}); };
  j["ranges"] = {{"modulus", range(p.modulus)},
                 {"threshold", range(p.threshold)},
                 {"digit_sum", range(p.digit_sum)},
                 {"base", range(p.base)},
                 {"offset", range(p.offset)}};
  j["max_set_size"] = p.max_set_size;
  j["max_attempts"] = p.max_attempts;
  j["boundary_distance"] = p.boundary_distance;
  j["malformed_share"] = p.malformed_share;
  j["degradation"] = nlohmann::json::array();
  for (const auto& r : p.degradation)
    j["degradation"].push_back(
        {{"feature", std::string(feature_name(r.feature))}, {"base", r.base}, {"slope", r.slope}, {"cap", r.cap}});
  return j;
}

SupportProfile profile_from_json(const nlohmann::json& j) {
  SupportProfile p = builtin_profile(j.contains("base_profile") ? j.at("base_profile").get<std::string>() : "full");
  try {
    p.name = j.value("name", std::string("custom"));
    if (j.contains("allowed_atoms")) {
      p.allowed_atoms.clear();
      for (const auto& a : j.at("allowed_atoms")) {
        auto k = dsl::atom_from_name(a.get<std::string>());
        if (!k)
          throw UsageError("unknown atom '" + a.get<std::string>() + "' in profile");
        p.allowed_atoms.insert(*k);
      }
    }
    if (j.contains("atom_weights")) {
      for (const auto& [name, w] : j.at("atom_weights").items()) {
        auto k = dsl::atom_from_name(name);
        if (!k)
          throw UsageError("unknown atom '" + name + "' in profile weights");
        p.atom_weights[*k] = w.get<double>();
      }
    }
    p.max_depth = j.value("max_depth", p.max_depth);
    p.boolean_combinators_enabled = j.value("boolean_combinators_enabled", p.boolean_combinators_enabled);
    p.combinator_prob = j.value("combinator_prob", p.combinator_prob);
    p.combinator_decay = j.value("combinator_decay", p.combinator_decay);
    if (j.contains("combinator_weights")) {
      const auto& cw = j.at("combinator_weights");
      p.not_weight = cw.value("not", p.not_weight);
      p.and_weight = cw.value("and", p.and_weight);
      p.or_weight = cw.value("or", p.or_weight);
      p.shift_weight = cw.value("shift", p.shift_weight);
    }
    if (j.contains("ranges")) {
      const auto& r = j.at("ranges");
      auto read = [&](const char* key, ParamRange& out) {
        if (r.contains(key))
          out = ParamRange{r.at(key).at(0).get<int>(), r.at(key).at(1).get<int>()};
      };
      read("modulus", p.modulus);
      read("threshold", p.threshold);
      read("digit_sum", p.digit_sum);
      read("base", p.base);
      read("offset", p.offset);
    }
    p.max_set_size = j.value("max_set_size", p.max_set_size);
    p.max_attempts = j.value("max_attempts", p.max_attempts);
    p.boundary_distance = j.value("boundary_distance", p.boundary_distance);
    p.malformed_share = j.value("malformed_share", p.malformed_share);
    if (j.contains("degradation")) {
      p.degradation.clear();
      for (const auto& d : j.at("degradation"))
        p.degradation.push_back({feature_from_name(d.at("feature").get<std::string>()), d.value("base", 0.0),
                                 d.value("slope", 0.0), d.value("cap", 1.0)});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw UsageError(std::string("malformed support profile: ") + ex.what());
  }
  p.validate();
  return p;
}

SupportProfile load_profile(const std::string& name_or_path) {
  const auto names = builtin_profile_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end())
    return builtin_profile(name_or_path);
  if (!std::filesystem::exists(name_or_path))
    throw UsageError("profile '" + name_or_path + "' is neither a built-in profile (full, degraded, no_prime) nor a file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(name_or_path));
  } catch (const nlohmann::json::exception& ex) {
    throw UsageError("malformed profile file " + name_or_path + ": " + ex.what());
  }
  return profile_from_json(j);
}

// ---------------------------------------------------------------------------
// Grammar sampler

namespace {

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Top-down grammar draw with the profile's distributions built once.
class Sampler {
public:
  Sampler(const SupportProfile& p, Rng& rng) : p_(p), rng_(rng) {
    std::vector<double> weights;
    for (auto k : p.allowed_atoms) {
      kinds_.push_back(k);
      weights.push_back(p.atom_weight(k));
    }
    atom_dist_ = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
    shift_ok_ = p.offset.lo < 0 || p.offset.hi > 0;
    const std::vector<double> cw = {p.not_weight, p.and_weight, p.or_weight, shift_ok_ ? p.shift_weight : 0.0};
    comb_total_ = cw[0] + cw[1] + cw[2] + cw[3];
    comb_dist_ = std::discrete_distribution<int>(cw.begin(), cw.end());
  }

  Expr draw(int level = 1) {
    const bool can_combine = p_.boolean_combinators_enabled && level < p_.max_depth && comb_total_ > 0.0;
    const double p_comb = can_combine ? p_.combinator_prob * std::pow(p_.combinator_decay, level - 1) : 0.0;
    if (uniform01(rng_) >= p_comb)
      return atom();
    switch (comb_dist_(rng_)) {
    case 0:
      return Expr::make_not(draw(level + 1));
    case 1: {
      Expr a = draw(level + 1);
      return Expr::make_and({std::move(a), draw(level + 1)});
    }
    case 2: {
      Expr a = draw(level + 1);
      return Expr::make_or({std::move(a), draw(level + 1)});
    }
    default: {
      int off = 0;
      while (off == 0)
        off = uniform_int(rng_, p_.offset.lo, p_.offset.hi);
      return Expr::make_shift(off, draw(level + 1));
    }
    }
  }

private:
  Expr atom() {
    const AtomKind k = kinds_[atom_dist_(rng_)];
    switch (k) {
    case AtomKind::Divisible:
      return Expr::make_atom(k, {uniform_int(rng_, p_.modulus.lo, p_.modulus.hi)});
    case AtomKind::ModEq: {
      const int m = uniform_int(rng_, p_.modulus.lo, p_.modulus.hi);
      return Expr::make_atom(k, {m, uniform_int(rng_, 0, m - 1)});
    }
    case AtomKind::LessThan:
    case AtomKind::GreaterThan:
      return Expr::make_atom(k, {uniform_int(rng_, p_.threshold.lo, p_.threshold.hi)});
    case AtomKind::EndsIn:
      return Expr::make_atom(k, {uniform_int(rng_, 0, 9)});
    case AtomKind::DigitSumLess:
    case AtomKind::DigitSumEq:
      return Expr::make_atom(k, {uniform_int(rng_, p_.digit_sum.lo, p_.digit_sum.hi)});
    case AtomKind::PowerOf:
      return Expr::make_atom(k, {uniform_int(rng_, p_.base.lo, p_.base.hi)});
    case AtomKind::InSet: {
      const int n = uniform_int(rng_, 1, p_.max_set_size);
      std::vector<int> members;
      for (int i = 0; i < n; ++i)
        members.push_back(uniform_int(rng_, 0, 100));
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      return Expr::make_atom(k, std::move(members));
    }
    default:
      return Expr::make_atom(k);
    }
  }

  const SupportProfile& p_;
  Rng& rng_;
  std::vector<AtomKind> kinds_;
  std::discrete_distribution<std::size_t> atom_dist_;
  std::discrete_distribution<int> comb_dist_;
  double comb_total_ = 0.0;
  bool shift_ok_ = false;
};

bool fits_data(const Expr& e, const Dataset& data, bool need_nonempty, const InstanceSpace& space) {
  for (const auto& ex : data)
    if (dsl::eval_at(e, ex.x) != ex.y)
      return false;
  if (need_nonempty) {
    for (Instance x = space.lo; x <= space.hi; ++x)
      if (dsl::eval_at(e, x))
        return true;
    return false;
  }
  return true;
}

std::string malformed_text(Sampler& sampler, Rng& rng) {
  // Any proper prefix of a rendered program is unparseable.
  const std::string text = dsl::to_text(sampler.draw());
  const auto cut = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<int>(text.size()) - 1));
  std::string out = text.substr(0, cut);
  while (!out.empty() && out.back() == ' ')
    out.pop_back();
  return out;
}

std::string inconsistent_text(Sampler& sampler, int max_attempts, const ProposalRequest& req) {
  for (int a = 0; a < max_attempts; ++a) {
    Expr e = sampler.draw();
    if (!fits_data(e, req.data, false, req.space))
      return dsl::to_text(e);
  }
  return count_positives(req.data) > 0 ? "false" : "true";
}

std::uint64_t derive_seed(std::uint64_t seed, const ProposalRequest& req) {
  Dataset sorted = req.data;
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledExample& a, const LabeledExample& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  std::string key = std::to_string(seed) + "|" + std::to_string(req.round) + "|" + std::to_string(req.attempt) +
                    "|" + std::to_string(req.num_proposals) + "|" + std::to_string(req.space.lo) + ":" +
                    std::to_string(req.space.hi) + "|";
  for (const auto& ex : sorted)
    key += std::to_string(ex.x) + (ex.y ? "+" : "-") + ",";
  return stable_hash64(key);
}

} // namespace

Expr sample_expr(const SupportProfile& profile, Rng& rng) {
  profile.validate();
  return Sampler(profile, rng).draw();
}

RawProposals grammar_propose(const SupportProfile& profile, const ProposalRequest& req, std::uint64_t seed) {
  profile.validate();
  req.validate();
  const std::uint64_t s = derive_seed(seed, req);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  Rng rng(seq);
  Sampler sampler(profile, rng);

  const bool need_nonempty = count_positives(req.data) == 0;
  const double p_fail = profile.failure_probability(req.data);
  RawProposals out;
  for (int slot = 0; slot < req.num_proposals; ++slot) {
    const double u = uniform01(rng);
    if (u < p_fail) {
      const bool malformed = req.data.empty() || uniform01(rng) < profile.malformed_share;
      out.texts.push_back(malformed ? malformed_text(sampler, rng)
                                     : inconsistent_text(sampler, profile.max_attempts, req));
      continue;
    }
    Expr e;
    for (int a = 0; a < profile.max_attempts; ++a) {
      e = sampler.draw();
      if (fits_data(e, req.data, need_nonempty, req.space))
        break;
    }
    out.texts.push_back(dsl::canonicalize(e));
  }
  return out;
}

ProposalBatch grammar_sample(const SupportProfile& profile, const ProposalRequest& req, std::uint64_t seed) {
  GrammarBackend backend(profile, seed);
  return generate(backend, req);
}

GrammarBackend::GrammarBackend(SupportProfile profile, std::uint64_t seed) : profile_(std::move(profile)), seed_(seed) {
  profile_.validate();
}

RawProposals GrammarBackend::propose(const ProposalRequest& req) { return grammar_propose(profile_, req, seed_); }

ScriptedBackend::ScriptedBackend(std::vector<std::vector<std::string>> rounds) : rounds_(std::move(rounds)) {
  if (rounds_.empty())
    rounds_.emplace_back();
}

RawProposals ScriptedBackend::propose(const ProposalRequest&) {
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(calls_), rounds_.size() - 1);
  ++calls_;
  return RawProposals{rounds_[i], {}};
}

CallbackBackend::CallbackBackend(Fn fn, std::string name) : fn_(std::move(fn)), name_(std::move(name)) {}

} // namespace numgame
