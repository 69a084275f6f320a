#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "numgame/loop.hpp"

namespace numgame {

nlohmann::json particles_to_json(const ParticleSet& ps);

nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

nlohmann::json stats_to_json(const ProposalStats& s);
ProposalStats stats_from_json(const nlohmann::json& j);

nlohmann::json iteration_to_json(const IterationRecord& r);
IterationRecord iteration_from_json(const nlohmann::json& j);

/// Header line (concept, config, backend, outcome) followed by one line per iteration.
std::string record_to_jsonl(const RunRecord& rec);
RunRecord record_from_jsonl(const std::string& text);

RunRecord read_trajectory(const std::filesystem::path& path);

} // namespace numgame
