#include <doctest.h>

#include <set>

#include "numgame/error.hpp"
#include "numgame/space.hpp"

using namespace numgame;

TEST_CASE("default space is 0..100") {
  InstanceSpace s;
  CHECK(s.lo == 0);
  CHECK(s.hi == 100);
  CHECK(s.size() == 101);
  CHECK(s.contains(0));
  CHECK(s.contains(100));
  CHECK_FALSE(s.contains(-1));
  CHECK_FALSE(s.contains(101));
  CHECK_THROWS_AS(InstanceSpace(5, 4), DomainError);
  CHECK_THROWS_AS(require_in_space(s, 101), DomainError);
}

TEST_CASE("extension behaves like a set") {
  InstanceSpace s{-3, 130};
  Extension e(s);
  std::set<int> ref;
  for (int x : {-3, 0, 63, 64, 65, 127, 128, 130, 64}) {
    e.insert(x);
    ref.insert(x);
  }
  CHECK(e.size() == ref.size());
  CHECK(e.members() == std::vector<int>(ref.begin(), ref.end()));
  for (int x = s.lo; x <= s.hi; ++x)
    CHECK(e.contains(x) == (ref.count(x) == 1));
  CHECK_FALSE(e.contains(-4));
  CHECK_FALSE(e.contains(131));
  CHECK_THROWS_AS(e.insert(131), DomainError);

  Extension sub(s);
  sub.insert(64);
  CHECK(sub.is_subset_of(e));
  CHECK_FALSE(e.is_subset_of(sub));
  Extension again(s);
  for (int x : ref)
    again.insert(x);
  CHECK(again == e);
  CHECK(again.hash() == e.hash());
}

TEST_CASE("extensions over different spaces differ") {
  Extension a(InstanceSpace{0, 10});
  Extension b(InstanceSpace{0, 11});
  CHECK_FALSE(a == b);
}

TEST_CASE("count_positives") {
  Dataset d{{1, true}, {2, false}, {3, true}};
  CHECK(count_positives(d) == 2);
  CHECK(count_positives({}) == 0);
}
