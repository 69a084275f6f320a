#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace numgame {

using Instance = int;

/// Closed integer interval [lo, hi] of queryable instances.
struct InstanceSpace {
  Instance lo = 0;
  Instance hi = 100;

  InstanceSpace() = default;
  InstanceSpace(Instance lo_, Instance hi_);

  std::size_t size() const noexcept { return static_cast<std::size_t>(hi - lo) + 1; }
  bool contains(Instance x) const noexcept { return x >= lo && x <= hi; }

  friend bool operator==(const InstanceSpace&, const InstanceSpace&) = default;
};

/// Throws DomainError unless x lies in the space.
void require_in_space(const InstanceSpace& space, Instance x);

/// One observation: instance x with binary label y.
struct LabeledExample {
  Instance x = 0;
  bool y = false;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

using Dataset = std::vector<LabeledExample>;

std::size_t count_positives(const Dataset& data) noexcept;

/// Membership bit-set over an InstanceSpace; bit i stands for instance lo + i.
class Extension {
public:
  Extension() = default;
  explicit Extension(const InstanceSpace& space);

  const InstanceSpace& space() const noexcept { return space_; }

  bool contains(Instance x) const noexcept;
  void insert(Instance x);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  std::vector<Instance> members() const;

  bool is_subset_of(const Extension& other) const noexcept;
  std::size_t hash() const noexcept;

  friend bool operator==(const Extension& a, const Extension& b) noexcept {
    return a.space_ == b.space_ && a.words_ == b.words_;
  }

private:
  InstanceSpace space_{};
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

struct ExtensionHash {
  std::size_t operator()(const Extension& e) const noexcept { return e.hash(); }
};

} // namespace numgame
