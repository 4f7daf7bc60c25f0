#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "cpdim/group.hpp"

using namespace cpdim;

TEST_CASE("box_folner enumerates boxes") {
  const auto f = box_folner(1, 3);
  REQUIRE(f.size() == 3);
  REQUIRE(f.contains(GroupElement{0}));
  REQUIRE(f.contains(GroupElement{2}));
  REQUIRE_FALSE(f.contains(GroupElement{3}));

  const auto g = box_folner(2, 2);
  REQUIRE(g.size() == 4);
  REQUIRE(g.contains(GroupElement{1, 1}));
  REQUIRE_FALSE(g.contains(GroupElement{2, 0}));

  REQUIRE(box_folner(1, 1).size() == 1);
  REQUIRE_THROWS_AS(box_folner(4, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(box_folner(1, 0), std::invalid_argument);
}

TEST_CASE("folner_defect is exact") {
  REQUIRE(folner_defect(box_folner(1, 10), GroupElement{1}) == Rational(2, 10));
  REQUIRE(folner_defect(box_folner(1, 7), GroupElement{0}) == Rational(0));
  REQUIRE(folner_defect(box_folner(2, 4), GroupElement{1, 0}) == Rational(1, 2));
}

TEST_CASE("folner_defect of boxes in Z is 2/n and shrinks under doubling") {
  for (int n = 1; n <= 40; ++n)
    REQUIRE(folner_defect(box_folner(1, n), GroupElement{1}) == Rational(2, n));

  const GroupElement g{3, -2};
  for (int n = 7; n <= 20; ++n) {
    const auto d1 = folner_defect(box_folner(2, n), g);
    const auto d2 = folner_defect(box_folner(2, 2 * n), g);
    REQUIRE(d2 < d1);
  }
}

TEST_CASE("canonical form is order independent") {
  std::vector<GroupElement> pts{{2, 1}, {0, 0}, {1, 1}, {0, 5}};
  std::mt19937 rng(12);
  const FiniteSubset reference(2, pts);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(pts.begin(), pts.end(), rng);
    auto doubled = pts;
    doubled.insert(doubled.end(), pts.begin(), pts.end());
    REQUIRE(FiniteSubset(2, doubled) == reference);
  }
}

TEST_CASE("growth_check on box sequences") {
  const auto rep1 = growth_check(FolnerSequence::boxes(1), 4);
  REQUIRE(rep1.ratios.size() == 3);
  REQUIRE(rep1.ratios[0] == Catch::Approx(2.0 / std::log(2.0)));
  REQUIRE(rep1.ratios[2] == Catch::Approx(4.0 / std::log(4.0)));
  REQUIRE(rep1.passes);

  const auto rep2 = growth_check(FolnerSequence::boxes(2), 3);
  REQUIRE(rep2.ratios.size() == 2);
  REQUIRE(rep2.ratios[1] == Catch::Approx(9.0 / std::log(3.0)));
  REQUIRE(rep2.passes);

  const FiniteSubset singleton(1, {GroupElement{0}});
  const auto constant = FolnerSequence::explicit_list(
      1, std::vector<FiniteSubset>(6, singleton));
  REQUIRE_FALSE(growth_check(constant, 5).passes);
}

TEST_CASE("folner sequence invariants") {
  REQUIRE_THROWS_AS(FolnerSequence::explicit_list(1, {}), std::invalid_argument);
  const auto shrinking = std::vector<FiniteSubset>{box_folner(1, 3), box_folner(1, 2)};
  REQUIRE_THROWS_AS(FolnerSequence::explicit_list(1, shrinking), std::invalid_argument);
}
