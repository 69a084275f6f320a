#include "numgame/concepts.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "numgame/error.hpp"

namespace numgame {

std::string_view tier_name(Tier t) noexcept {
  switch (t) {
  case Tier::Easy:
    return "Easy";
  case Tier::Medium:
    return "Medium";
  case Tier::Hard:
    return "Hard";
  }
  return "Easy";
}

Tier tier_from_name(std::string_view name) {
  if (name == "Easy" || name == "easy")
    return Tier::Easy;
  if (name == "Medium" || name == "medium")
    return Tier::Medium;
  if (name == "Hard" || name == "hard")
    return Tier::Hard;
  throw UsageError("unknown tier '" + std::string(name) + "' (expected Easy, Medium or Hard)");
}

const std::vector<CatalogEntry>& builtin_catalog_entries() {
  // 0 counts as a multiple of every k; powers of 2 start at 2^0 = 1.
  static const std::vector<CatalogEntry> entries = {
      {"squares", Tier::Easy, "square", "Square numbers"},
      {"multiples_of_4", Tier::Easy, "divisible(4)", "Multiples of 4"},
      {"odd_numbers", Tier::Easy, "odd", "Odd numbers"},
      {"powers_of_2", Tier::Easy, "power_of(2)", "Powers of 2"},
      {"even_lt_30", Tier::Medium, "and(even, less_than(30))", "Even numbers < 30"},
      {"mult_3_or_7", Tier::Medium, "or(divisible(3), divisible(7))", "Multiples of 3 or 7"},
      {"odd_mult_3", Tier::Medium, "and(odd, divisible(3))", "Odd multiples of 3"},
      {"ends_in_6", Tier::Medium, "ends_in(6)", "Numbers ending in 6"},
      {"digitsum_lt_8", Tier::Hard, "digit_sum_less(8)", "Digits sum to < 8"},
      {"mod9_eq_5", Tier::Hard, "mod_eq(9, 5)", "Remainder = 5 (mod 9)"},
      {"prime_minus_1", Tier::Hard, "shift(1, prime)", "One less than a prime"},
      {"twice_square_minus_2", Tier::Hard, "in_set(0, 6, 16, 30, 48, 70, 96)", "Twice a square minus 2"},
  };
  return entries;
}

std::vector<TargetConcept> catalog(const InstanceSpace& space) {
  return build_catalog(builtin_catalog_entries(), space);
}

std::vector<TargetConcept> build_catalog(const std::vector<CatalogEntry>& entries, const InstanceSpace& space) {
  std::vector<TargetConcept> out;
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (e.id.empty())
      throw UsageError("catalog entry with empty id");
    if (!seen.insert(e.id).second)
      throw UsageError("duplicate catalog id '" + e.id + "'");
    auto h = dsl::Hypothesis::from_text(e.dsl, space);
    if (h->extension().empty())
      throw UsageError("catalog concept '" + e.id + "' has an empty extension");
    out.push_back(TargetConcept{e.id, e.tier, std::move(h), e.display_name.empty() ? e.id : e.display_name});
  }
  return out;
}

std::vector<TargetConcept> load_catalog(const std::filesystem::path& path, const InstanceSpace& space) {
  std::ifstream in(path);
  if (!in)
    throw UsageError("cannot open catalog file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw UsageError("malformed catalog file " + path.string() + ": " + ex.what());
  }
  if (!j.is_array())
    throw UsageError("catalog file must hold a JSON array");
  std::vector<CatalogEntry> entries;
  for (const auto& item : j) {
    try {
      entries.push_back(CatalogEntry{item.at("id").get<std::string>(),
                                     tier_from_name(item.at("tier").get<std::string>()),
                                     item.at("dsl").get<std::string>(),
                                     item.value("display_name", std::string{})});
    } catch (const nlohmann::json::exception& ex) {
      throw UsageError("bad catalog entry in " + path.string() + ": " + ex.what());
    }
  }
  return build_catalog(entries, space);
}

const TargetConcept* find_concept(const std::vector<TargetConcept>& concepts, std::string_view id) noexcept {
  for (const auto& c : concepts)
    if (c.id == id)
      return &c;
  return nullptr;
}

bool oracle_label(const TargetConcept& c, Instance x) {
  require_in_space(c.extension().space(), x);
  return c.extension().contains(x);
}

} // namespace numgame
