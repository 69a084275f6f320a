#include "numgame/trace.hpp"

#include <sstream>

#include "numgame/error.hpp"
#include "numgame/util.hpp"

namespace numgame {

using nlohmann::json;

json particles_to_json(const ParticleSet& ps) {
  json arr = json::array();
  for (const auto& p : ps.particles())
    arr.push_back({{"canonical_text", p.hypothesis->text()}, {"weight", p.weight}});
  return arr;
}

json config_to_json(const RunConfig& cfg) {
  return {{"budget", cfg.budget},
          {"particles", cfg.particles},
          {"conf_threshold", cfg.conf_threshold},
          {"ess_frac", cfg.ess_frac},
          {"rejuv_batch", cfg.effective_rejuv_batch()},
          {"rejuv_retries", cfg.rejuv_retries},
          {"seed", cfg.seed},
          {"policy", std::string(policy_name(cfg.policy))},
          {"seed_positive", cfg.seed_positive},
          {"prior_lambda", cfg.prior.lambda},
          {"use_backend_score", cfg.prior.use_backend_score}};
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  cfg.budget = j.value("budget", cfg.budget);
  cfg.particles = j.value("particles", cfg.particles);
  cfg.conf_threshold = j.value("conf_threshold", cfg.conf_threshold);
  cfg.ess_frac = j.value("ess_frac", cfg.ess_frac);
  cfg.rejuv_batch = j.value("rejuv_batch", cfg.rejuv_batch);
  cfg.rejuv_retries = j.value("rejuv_retries", cfg.rejuv_retries);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.policy = policy_from_name(j.value("policy", std::string("eig")));
  cfg.seed_positive = j.value("seed_positive", cfg.seed_positive);
  cfg.prior.lambda = j.value("prior_lambda", cfg.prior.lambda);
  cfg.prior.use_backend_score = j.value("use_backend_score", cfg.prior.use_backend_score);
  return cfg;
}

json stats_to_json(const ProposalStats& s) {
  return {{"requested", s.requested},
          {"returned", s.returned},
          {"parse_valid", s.parse_valid},
          {"consistent", s.consistent},
          {"novel_extensions", s.novel_extensions}};
}

ProposalStats stats_from_json(const json& j) {
  return {j.at("requested").get<int>(), j.at("returned").get<int>(), j.at("parse_valid").get<int>(),
          j.at("consistent").get<int>(), j.at("novel_extensions").get<int>()};
}

json iteration_to_json(const IterationRecord& r) {
  json particles = json::array();
  for (const auto& [text, w] : r.particles)
    particles.push_back({{"canonical_text", text}, {"weight", w}});
  return {{"t", r.t},
          {"query", r.query},
          {"label", r.label ? 1 : 0},
          {"map_text", r.map_text},
          {"map_confidence", r.map_confidence},
          {"ess_before", r.ess_before},
          {"ess_after", r.ess_after},
          {"rejuvenated", r.rejuvenated},
          {"proposal_stats", r.proposal_stats ? stats_to_json(*r.proposal_stats) : json(nullptr)},
          {"nll_true", r.nll_true},
          {"pts_exhausted", r.pts_exhausted},
          {"generator_failure", r.generator_failure},
          {"passive_fallback", r.passive_fallback},
          {"eig_degenerate", r.eig_degenerate},
          {"particles", particles}};
}

IterationRecord iteration_from_json(const json& j) {
  IterationRecord r;
  r.t = j.at("t").get<int>();
  r.query = j.at("query").get<int>();
  r.label = j.at("label").get<int>() != 0;
  r.map_text = j.at("map_text").get<std::string>();
  r.map_confidence = j.at("map_confidence").get<double>();
  r.ess_before = j.at("ess_before").get<double>();
  r.ess_after = j.at("ess_after").get<double>();
  r.rejuvenated = j.at("rejuvenated").get<bool>();
  if (!j.at("proposal_stats").is_null())
    r.proposal_stats = stats_from_json(j.at("proposal_stats"));
  r.nll_true = j.at("nll_true").get<double>();
  r.pts_exhausted = j.value("pts_exhausted", false);
  r.generator_failure = j.value("generator_failure", false);
  r.passive_fallback = j.value("passive_fallback", false);
  r.eig_degenerate = j.value("eig_degenerate", false);
  if (j.contains("particles"))
    for (const auto& p : j.at("particles"))
      r.particles.emplace_back(p.at("canonical_text").get<std::string>(), p.at("weight").get<double>());
  return r;
}

std::string record_to_jsonl(const RunRecord& rec) {
  json outcome = {{"kind", std::string(outcome_name(rec.outcome.kind))}};
  if (rec.outcome.kind == OutcomeKind::Converged) {
    outcome["queries"] = rec.outcome.queries;
    outcome["correct"] = rec.outcome.correct;
  }
  if (rec.outcome.kind == OutcomeKind::Aborted)
    outcome["reason"] = rec.outcome.abort_reason;
  json header = {{"type", "header"},
                 {"concept_id", rec.concept_id},
                 {"tier", std::string(tier_name(rec.tier))},
                 {"backend", rec.backend},
                 {"config", config_to_json(rec.config)},
                 {"outcome", outcome}};
  std::string out = header.dump() + "\n";
  for (const auto& it : rec.iterations) {
    json line = iteration_to_json(it);
    line["type"] = "iteration";
    out += line.dump() + "\n";
  }
  return out;
}

RunRecord record_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  RunRecord rec;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty())
        continue;
      const json j = json::parse(line);
      if (j.at("type") == "header") {
        rec.concept_id = j.at("concept_id").get<std::string>();
        rec.tier = tier_from_name(j.at("tier").get<std::string>());
        rec.backend = j.value("backend", std::string{});
        rec.config = config_from_json(j.at("config"));
        const auto& o = j.at("outcome");
        const auto kind = o.at("kind").get<std::string>();
        if (kind == "converged")
          rec.outcome = {OutcomeKind::Converged, o.at("queries").get<int>(), o.at("correct").get<bool>(), {}};
        else if (kind == "aborted")
          rec.outcome = {OutcomeKind::Aborted, 0, false, o.value("reason", std::string{})};
        else
          rec.outcome = {OutcomeKind::DNF, 0, false, {}};
        have_header = true;
      } else {
        rec.iterations.push_back(iteration_from_json(j));
      }
    }
  } catch (const json::exception& ex) {
    throw UsageError(std::string("malformed trajectory: ") + ex.what());
  }
  if (!have_header)
    throw UsageError("trajectory has no header line");
  return rec;
}

RunRecord read_trajectory(const std::filesystem::path& path) { return record_from_jsonl(read_file(path)); }

} // namespace numgame
