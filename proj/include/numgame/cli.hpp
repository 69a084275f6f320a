#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "numgame/loop.hpp"

namespace numgame {

struct CliConfig {
  std::string command;
  std::string rule;   // concept id or "all"; empty means the command's default
  std::string policy; // policy name or "all"
  std::string backend = "grammar";
  std::string profile = "full"; // built-in name or JSON file
  std::optional<std::string> catalog_path;
  std::uint64_t seed = 0;
  std::string seeds; // "a..b" or comma list; bench only
  std::filesystem::path out_dir = "out";
  int jobs = 0;      // 0: hardware concurrency
  RunConfig run;
  LlmConfig llm = LlmConfig::from_env();
};

/// Parses "a..b" (inclusive) or "a,b,c".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

using BackendFactory = std::function<std::unique_ptr<ProposalBackend>(std::uint64_t seed)>;

struct GridSpec {
  std::vector<TargetConcept> concepts;
  std::vector<PolicyKind> policies;
  std::vector<std::uint64_t> seeds;
  RunConfig base;
  BackendFactory backend;
  int jobs = 1;
};

/// Runs every (concept, policy, seed) cell; results are in cell order regardless of jobs.
std::vector<RunRecord> run_grid(const GridSpec& spec);

/// Table of one trajectory: iteration, top hypothesis with confidence, query and answer.
std::string trajectory_table(const RunRecord& rec);

std::string trajectory_filename(const RunRecord& rec);

/// Entry point for the numgame tool. Returns 0 on completion (DNF included),
/// 1 when a run aborted, 2 on usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace numgame
