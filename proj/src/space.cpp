#include "numgame/space.hpp"

#include <algorithm>
#include <string>

#include "numgame/error.hpp"

namespace numgame {

InstanceSpace::InstanceSpace(Instance lo_, Instance hi_) : lo(lo_), hi(hi_) {
  if (lo > hi)
    throw DomainError("instance space requires lo <= hi, got [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
}

void require_in_space(const InstanceSpace& space, Instance x) {
  if (!space.contains(x))
    throw DomainError("instance " + std::to_string(x) + " outside [" + std::to_string(space.lo) +
                      ", " + std::to_string(space.hi) + "]");
}

std::size_t count_positives(const Dataset& data) noexcept {
  return static_cast<std::size_t>(
      std::count_if(data.begin(), data.end(), [](const LabeledExample& e) { return e.y; }));
}

Extension::Extension(const InstanceSpace& space)
    : space_(space), words_((space.size() + 63) / 64, 0) {}

bool Extension::contains(Instance x) const noexcept {
  if (!space_.contains(x))
    return false;
  const auto i = static_cast<std::size_t>(x - space_.lo);
  return (words_[i / 64] >> (i % 64)) & 1U;
}

void Extension::insert(Instance x) {
  require_in_space(space_, x);
  const auto i = static_cast<std::size_t>(x - space_.lo);
  const std::uint64_t bit = std::uint64_t{1} << (i % 64);
  if (!(words_[i / 64] & bit)) {
    words_[i / 64] |= bit;
    ++size_;
  }
}

std::vector<Instance> Extension::members() const {
  std::vector<Instance> out;
  out.reserve(size_);
  for (Instance x = space_.lo; x <= space_.hi; ++x)
    if (contains(x))
      out.push_back(x);
  return out;
}

bool Extension::is_subset_of(const Extension& other) const noexcept {
  if (!(space_ == other.space_))
    return false;
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & ~other.words_[i])
      return false;
  return true;
}

std::size_t Extension::hash() const noexcept {
  std::size_t h = std::hash<Instance>{}(space_.lo) ^ (std::hash<Instance>{}(space_.hi) << 1);
  for (auto w : words_)
    h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

} // namespace numgame
