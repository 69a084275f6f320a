#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "numgame/dsl.hpp"
#include "numgame/space.hpp"

namespace numgame {

enum class Tier { Easy, Medium, Hard };

std::string_view tier_name(Tier t) noexcept;
Tier tier_from_name(std::string_view name);

/// A hidden target rule h* with its difficulty tier.
struct TargetConcept {
  std::string id;
  Tier tier = Tier::Easy;
  dsl::HypothesisPtr predicate;
  std::string display_name;

  const Extension& extension() const { return predicate->extension(); }
};

struct CatalogEntry {
  std::string id;
  Tier tier;
  std::string dsl;
  std::string display_name;
};

/// The twelve built-in rules, Easy through Hard.
const std::vector<CatalogEntry>& builtin_catalog_entries();

std::vector<TargetConcept> catalog(const InstanceSpace& space = {});

/// Builds concepts from entries; rejects duplicate ids and empty extensions.
std::vector<TargetConcept> build_catalog(const std::vector<CatalogEntry>& entries,
                                         const InstanceSpace& space = {});

/// Reads a JSON array of {id, tier, dsl, display_name}.
std::vector<TargetConcept> load_catalog(const std::filesystem::path& path, const InstanceSpace& space = {});

const TargetConcept* find_concept(const std::vector<TargetConcept>& concepts, std::string_view id) noexcept;

/// Noise-free label h*(x). Throws DomainError when x is outside the concept's space.
bool oracle_label(const TargetConcept& c, Instance x);

} // namespace numgame
