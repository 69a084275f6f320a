#include "numgame/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "numgame/error.hpp"
#include "numgame/metrics.hpp"
#include "numgame/trace.hpp"
#include "numgame/util.hpp"

namespace numgame {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w)
    s.append(w - s.size(), ' ');
  return s;
}

// Config file keys mirror the long flag names with '-' replaced by '_'.
void apply_config_file(CliConfig& c, const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& ex) {
    throw UsageError("config file " + path.string() + " is not valid JSON: " + ex.what());
  } catch (const Error& ex) {
    throw UsageError(ex.what());
  }
  if (!j.is_object())
    throw UsageError("config file must hold a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "rule") c.rule = v.get<std::string>();
      else if (key == "policy") c.policy = v.get<std::string>();
      else if (key == "backend") c.backend = v.get<std::string>();
      else if (key == "profile") c.profile = v.get<std::string>();
      else if (key == "catalog") c.catalog_path = v.get<std::string>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "seeds") c.seeds = v.is_string() ? v.get<std::string>() : v.dump();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "jobs") c.jobs = v.get<int>();
      else if (key == "budget") c.run.budget = v.get<int>();
      else if (key == "particles") c.run.particles = v.get<int>();
      else if (key == "conf_threshold") c.run.conf_threshold = v.get<double>();
      else if (key == "ess_frac") c.run.ess_frac = v.get<double>();
      else if (key == "rejuv_batch") c.run.rejuv_batch = v.get<int>();
      else if (key == "rejuv_retries") c.run.rejuv_retries = v.get<int>();
      else if (key == "seed_positive") c.run.seed_positive = v.get<bool>();
      else if (key == "prior_lambda") c.run.prior.lambda = v.get<double>();
      else if (key == "use_backend_score") c.run.prior.use_backend_score = v.get<bool>();
      else if (key == "llm_cache_dir") c.llm.cache_dir = v.get<std::string>();
      else if (key == "llm_no_cache") c.llm.use_cache = !v.get<bool>();
      else if (key == "llm_replay_only") c.llm.replay_only = v.get<bool>();
      else if (key == "llm_timeout") c.llm.timeout_s = v.get<double>();
      else if (key == "llm_retries") c.llm.retries = v.get<int>();
      else if (key == "llm_model") c.llm.model = v.get<std::string>();
      else throw UsageError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& ex) {
    throw UsageError("bad value in config file: " + std::string(ex.what()));
  }
}

std::optional<std::string> find_config_flag(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc)
      return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0)
      return a.substr(9);
  }
  return std::nullopt;
}

void add_common_options(CLI::App& sub, CliConfig& c, std::string& config_file) {
  sub.add_option("--config", config_file, "JSON file mirroring these flags");
  sub.add_option("--rule", c.rule, "Concept id; bench also takes a comma list or 'all'");
  sub.add_option("--policy", c.policy, "eig, pts, passive, or 'all' (bench)");
  sub.add_option("--backend", c.backend, "grammar or llm")->check(CLI::IsMember({"grammar", "llm"}));
  sub.add_option("--profile", c.profile, "Grammar support profile: full, degraded, no_prime, or a JSON file");
  sub.add_option("--catalog", c.catalog_path, "JSON concept catalog replacing the built-in one");
  sub.add_option("--out-dir", c.out_dir, "Output directory");
  sub.add_option("--budget", c.run.budget, "Query budget T");
  sub.add_option("--particles", c.run.particles, "Particle count N");
  sub.add_option("--conf", c.run.conf_threshold, "MAP confidence needed to stop");
  sub.add_option("--ess-frac", c.run.ess_frac, "Rejuvenate when ESS < ess-frac * N");
  sub.add_option("--rejuv-batch", c.run.rejuv_batch, "Proposals per rejuvenation (0: 2N)");
  sub.add_option("--rejuv-retries", c.run.rejuv_retries, "Extra proposal rounds when the posterior stays empty");
  sub.add_option("--prior-lambda", c.run.prior.lambda, "Simplicity prior strength per token");
  sub.add_flag_callback("--no-seed-positive", [&c] { c.run.seed_positive = false; }, "Start from an empty dataset");
  sub.add_flag_callback("--no-backend-score", [&c] { c.run.prior.use_backend_score = false; },
                        "Ignore backend scores in the prior");
  sub.add_option("--llm-cache-dir", c.llm.cache_dir, "Replay cache directory (relative to --out-dir)");
  sub.add_flag_callback("--llm-no-cache", [&c] { c.llm.use_cache = false; }, "Do not read or write the cache");
  sub.add_flag_callback("--llm-replay-only", [&c] { c.llm.replay_only = true; }, "Serve only from the cache");
  sub.add_option("--llm-timeout", c.llm.timeout_s, "Request timeout in seconds");
  sub.add_option("--llm-retries", c.llm.retries, "Retries per request");
  sub.add_option("--llm-model", c.llm.model, "Model name sent in the cache key");
}

std::vector<TargetConcept> load_concepts(const CliConfig& c) {
  return c.catalog_path ? load_catalog(*c.catalog_path) : catalog();
}

std::vector<TargetConcept> select_rules(const std::vector<TargetConcept>& all, const std::string& rule) {
  if (rule == "all")
    return all;
  std::vector<TargetConcept> out;
  std::stringstream ss(rule);
  std::string id;
  while (std::getline(ss, id, ',')) {
    if (const auto* found = find_concept(all, id)) {
      out.push_back(*found);
      continue;
    }
    std::string ids;
    for (const auto& cpt : all)
      ids += (ids.empty() ? "" : ", ") + cpt.id;
    throw UsageError("unknown rule '" + id + "'; valid rules: " + ids);
  }
  if (out.empty())
    throw UsageError("no rule given");
  return out;
}

std::vector<PolicyKind> select_policies(const std::string& policy) {
  if (policy == "all")
    return {PolicyKind::EIG, PolicyKind::PTS, PolicyKind::Passive};
  try {
    return {policy_from_name(policy)};
  } catch (const UsageError&) {
    throw UsageError("unknown policy '" + policy + "'; valid policies: eig, pts, passive, all");
  }
}

BackendFactory make_factory(const CliConfig& c) {
  if (c.backend == "grammar") {
    auto profile = load_profile(c.profile);
    return [profile](std::uint64_t seed) { return std::make_unique<GrammarBackend>(profile, seed); };
  }
  LlmConfig llm = c.llm;
  if (llm.cache_dir.is_relative())
    llm.cache_dir = c.out_dir / llm.cache_dir;
  return [llm](std::uint64_t) { return std::make_unique<LlmBackend>(llm); };
}

int jobs_or_default(int jobs) {
  if (jobs > 0)
    return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_trajectory(const fs::path& out_dir, const RunRecord& rec) {
  atomic_write(out_dir / "trajectories" / trajectory_filename(rec), record_to_jsonl(rec));
}

int cmd_run(CliConfig& c, std::ostream& out, std::ostream& err) {
  const auto concepts = load_concepts(c);
  const auto rule = select_rules(concepts, c.rule.empty() ? concepts.front().id : c.rule);
  if (rule.size() != 1)
    throw UsageError("run takes a single rule");
  const auto pols = select_policies(c.policy.empty() ? "eig" : c.policy);
  if (pols.size() != 1)
    throw UsageError("run takes a single policy");
  RunConfig cfg = c.run;
  cfg.seed = c.seed;
  cfg.policy = pols.front();
  cfg.validate();
  auto backend = make_factory(c)(cfg.seed);

  const RunRecord rec = run_trial(rule.front(), cfg, *backend);
  write_trajectory(c.out_dir, rec);
  out << "Rule: " << rec.concept_id << " (" << tier_name(rec.tier) << ")  policy: " << policy_name(cfg.policy)
      << "  backend: " << rec.backend << "  seed: " << cfg.seed << "\n\n";
  out << trajectory_table(rec) << "\n";
  switch (rec.outcome.kind) {
  case OutcomeKind::Converged:
    out << "Converged after " << rec.outcome.queries << " queries (" << (rec.outcome.correct ? "correct" : "incorrect")
        << ")\n";
    return 0;
  case OutcomeKind::DNF:
    out << "DNF: no convergence within " << cfg.budget << " queries\n";
    return 0;
  case OutcomeKind::Aborted:
    err << "aborted: " << rec.outcome.abort_reason << "\n";
    return 1;
  }
  return 0;
}

int cmd_bench(CliConfig& c, std::ostream& out, std::ostream& err) {
  const auto concepts = load_concepts(c);
  GridSpec spec;
  spec.concepts = select_rules(concepts, c.rule.empty() ? "all" : c.rule);
  spec.policies = select_policies(c.policy.empty() ? "all" : c.policy);
  spec.seeds = parse_seed_list(c.seeds.empty() ? "0..19" : c.seeds);
  spec.base = c.run;
  spec.base.validate();
  spec.backend = make_factory(c);
  spec.jobs = jobs_or_default(c.jobs);

  const auto records = run_grid(spec);
  const auto grid = aggregate(records);
  const auto mm = mismatch_report(records);
  for (const auto& r : records)
    write_trajectory(c.out_dir, r);
  atomic_write(c.out_dir / "results.csv", results_csv(grid));
  atomic_write(c.out_dir / "nll.csv", nll_csv(records));
  atomic_write(c.out_dir / "mismatch.csv", mismatch_csv(mm));

  out << "Queries to convergence (median over " << spec.seeds.size() << " seeds, budget " << spec.base.budget
      << "):\n\n"
      << tier_table(grid);
  const auto aborted = std::count_if(records.begin(), records.end(),
                                     [](const RunRecord& r) { return r.outcome.kind == OutcomeKind::Aborted; });
  if (aborted > 0) {
    err << aborted << " of " << records.size() << " cells aborted\n";
    for (const auto& r : records)
      if (r.outcome.kind == OutcomeKind::Aborted) {
        err << "  first abort: " << r.outcome.abort_reason << "\n";
        break;
      }
  }
  return !records.empty() && aborted == static_cast<long>(records.size()) ? 1 : 0;
}

int cmd_report(CliConfig& c, std::ostream& out) {
  const fs::path dir = c.out_dir / "trajectories";
  if (!fs::is_directory(dir))
    throw UsageError("no trajectories under " + dir.string() + "; run bench first");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".jsonl")
      files.push_back(e.path());
  if (files.empty())
    throw UsageError("no trajectories under " + dir.string() + "; run bench first");
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> records;
  for (const auto& f : files)
    records.push_back(read_trajectory(f));

  const auto grid = aggregate(records);
  const auto mm = mismatch_report(records);
  std::ostringstream r;
  r << "Runs: " << records.size() << "\n\n";
  r << "Queries to convergence (median over converged seeds):\n\n" << tier_table(grid) << "\n";
  r << "Per-tier summary:\n" << tier_findings(grid) << "\n";
  r << "Proposal health at rejuvenation:\n" << mismatch_summary(mm);
  const std::string text = r.str();
  atomic_write(c.out_dir / "report.txt", text);
  out << text;
  return 0;
}

} // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || s.front() == '-')
      throw UsageError("bad seed '" + s + "' in '" + text + "'");
    return static_cast<std::uint64_t>(v);
  };
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto a = num(text.substr(0, dots));
    const auto b = num(text.substr(dots + 2));
    if (b < a)
      throw UsageError("empty seed range '" + text + "'");
    for (auto s = a; s <= b; ++s)
      out.push_back(s);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(num(item));
  if (out.empty())
    throw UsageError("no seeds given");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<RunRecord> run_grid(const GridSpec& spec) {
  struct Cell {
    const TargetConcept* target;
    PolicyKind policy;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& cpt : spec.concepts)
    for (auto p : spec.policies)
      for (auto s : spec.seeds)
        cells.push_back({&cpt, p, s});

  std::vector<RunRecord> out(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      RunConfig cfg = spec.base;
      cfg.policy = cells[i].policy;
      cfg.seed = cells[i].seed;
      auto backend = spec.backend(cfg.seed);
      out[i] = run_trial(*cells[i].target, cfg, *backend);
    }
  };
  const int jobs = std::max(1, std::min<int>(spec.jobs, static_cast<int>(cells.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back(worker);
  }
  return out;
}

std::string trajectory_filename(const RunRecord& rec) {
  return rec.concept_id + "__" + std::string(policy_name(rec.config.policy)) + "__seed" +
         std::to_string(rec.config.seed) + ".jsonl";
}

std::string trajectory_table(const RunRecord& rec) {
  std::ostringstream o;
  o << pad("Iter", 6) << pad("Top hypothesis (confidence)", 52) << pad("Query", 7) << "Answer\n";
  for (const auto& it : rec.iterations) {
    std::string top = it.map_text.empty() ? "(empty posterior)" : it.map_text + " (" + fmt2(it.map_confidence) + ")";
    std::string note;
    if (it.t == 0)
      note = "  seed";
    else if (it.passive_fallback)
      note = "  passive fallback";
    else if (it.pts_exhausted)
      note = "  pts exhausted";
    if (it.generator_failure)
      note += "  generator failure";
    o << pad(std::to_string(it.t), 6) << pad(top, 52) << pad(std::to_string(it.query), 7)
      << (it.label ? "Yes" : "No") << note << "\n";
  }
  return o.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig c;
  std::string config_file;
  CLI::App app{"Active Bayesian concept learning in the Number Game"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Run one trial and print its trajectory");
  auto* bench = app.add_subcommand("bench", "Run a (rules x policies x seeds) grid and write CSVs");
  auto* report = app.add_subcommand("report", "Summarize a completed bench");
  for (auto* sub : {run, bench, report})
    add_common_options(*sub, c, config_file);
  run->add_option("--seed", c.seed, "Trial seed");
  bench->add_option("--seeds", c.seeds, "Seed range a..b or list a,b,c (default 0..19)");
  bench->add_option("--jobs", c.jobs, "Parallel cells (default: hardware threads)");

  try {
    if (auto path = find_config_flag(argc, argv))
      apply_config_file(c, *path);
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 2;
    }
    if (run->parsed())
      return cmd_run(c, out, err);
    if (bench->parsed())
      return cmd_bench(c, out, err);
    return cmd_report(c, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const BackendUnavailable& e) {
    err << "aborted: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

} // namespace numgame
