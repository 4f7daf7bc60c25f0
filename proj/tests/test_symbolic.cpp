#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "cpdim/detail/util.hpp"
#include "cpdim/symbolic.hpp"

using namespace cpdim;

namespace {

Configuration constant_config(const SymbolicSystem& sys, Symbol s) {
  return Configuration::periodic(sys, Pattern{s}, GroupElement{1, 1, 1});
}

}  // namespace

TEST_CASE("metric_level") {
  const auto sys = SymbolicSystem::full_shift(2, 1);
  const auto zero = constant_config(sys, 0);
  REQUIRE_FALSE(metric_level(zero, zero, 4, 1).level.has_value());

  auto deviate_at = [&](std::int32_t pos) {
    return Configuration::lazy(
        sys, [pos](const GroupElement& g) { return g.coords[0] == pos ? 1 : 0; }, 0);
  };
  REQUIRE(metric_level(zero, deviate_at(0), 3, 1).level == 0);

  auto deviate_pm2 = Configuration::lazy(
      sys, [](const GroupElement& g) { return std::abs(g.coords[0]) == 2 ? 1 : 0; }, 0);
  REQUIRE(metric_level(zero, deviate_pm2, 5, 1).level == 2);
}

TEST_CASE("bowen_window sumsets") {
  const auto f3 = box_folner(1, 3);
  REQUIRE(bowen_window(f3, EpsilonLevel(0)) == f3);
  const auto w1 = bowen_window(f3, EpsilonLevel(1));
  REQUIRE(w1.size() == 5);
  REQUIRE(w1.contains(GroupElement{-1}));
  REQUIRE(w1.contains(GroupElement{3}));

  const auto w2 = bowen_window(box_folner(2, 2), EpsilonLevel(1));
  REQUIRE(w2.size() == 16);
  REQUIRE(w2.contains(GroupElement{-1, -1}));
  REQUIRE(w2.contains(GroupElement{2, 2}));
}

TEST_CASE("ball_of reads the configuration") {
  const auto sys = SymbolicSystem::full_shift(2, 1);
  const auto zero = constant_config(sys, 0);
  const auto f2 = box_folner(1, 2);

  const auto b0 = ball_of(zero, f2, EpsilonLevel(0));
  REQUIRE(b0.support->size() == 2);
  REQUIRE(b0.symbols == Pattern{0, 0});

  // x with x_{-1..2} = 0110 read on the level-1 window of [0,2).
  const auto x = Configuration::lazy(
      sys,
      [](const GroupElement& g) {
        const auto c = g.coords[0];
        return (c == 0 || c == 1) ? 1 : 0;
      },
      0);
  const auto b1 = ball_of(x, f2, EpsilonLevel(1));
  REQUIRE(b1.support->size() == 4);
  REQUIRE(b1.symbols == Pattern{0, 1, 1, 0});

  // Partition property at depth 2: the four balls tile the space.
  const auto balls = enumerate_balls(sys, TargetSet::whole(), f2, EpsilonLevel(0));
  REQUIRE(balls.size() == 4);
  for (std::size_t i = 0; i < balls.size(); ++i)
    for (std::size_t j = i + 1; j < balls.size(); ++j)
      REQUIRE(balls_relation(sys, balls[i], balls[j]) == BallsRelation::Disjoint);
}

TEST_CASE("balls_relation cases") {
  const auto sys = SymbolicSystem::full_shift(2, 1);
  auto sup = [](std::vector<GroupElement> pts) {
    return std::make_shared<const std::vector<GroupElement>>(std::move(pts));
  };
  const Cylinder zero_at_0{sup({GroupElement{0}}), {0}};
  const Cylinder one_at_0{sup({GroupElement{0}}), {1}};
  const Cylinder zero_one{sup({GroupElement{0}, GroupElement{1}}), {0, 1}};
  const Cylinder one_at_1{sup({GroupElement{1}}), {1}};

  REQUIRE(balls_relation(sys, zero_at_0, one_at_0) == BallsRelation::Disjoint);
  REQUIRE(balls_relation(sys, zero_one, zero_at_0) == BallsRelation::Nested);
  REQUIRE(balls_relation(sys, zero_at_0, one_at_1) == BallsRelation::Overlapping);

  // Symmetry.
  REQUIRE(balls_relation(sys, one_at_0, zero_at_0) == BallsRelation::Disjoint);
  REQUIRE(balls_relation(sys, zero_at_0, zero_one) == BallsRelation::Nested);
  REQUIRE(balls_relation(sys, one_at_1, zero_at_0) == BallsRelation::Overlapping);

  // For the golden-mean shift, "1 at 0" and "1 at 1" have no joint extension.
  const auto gm = SymbolicSystem::sft1d(2, {SymbolicSystem::word("11")});
  const Cylinder g_one_0{sup({GroupElement{0}}), {1}};
  const Cylinder g_one_1{sup({GroupElement{1}}), {1}};
  REQUIRE(balls_relation(gm, g_one_0, g_one_1) == BallsRelation::Disjoint);
  const Cylinder g_one_2{sup({GroupElement{2}}), {1}};
  REQUIRE(balls_relation(gm, g_one_0, g_one_2) == BallsRelation::Overlapping);
}

TEST_CASE("enumerate_balls universes") {
  const auto full = SymbolicSystem::full_shift(2, 1);
  const auto f2 = box_folner(1, 2);
  REQUIRE(enumerate_balls(full, TargetSet::whole(), f2, EpsilonLevel(0)).size() == 4);

  const auto gm = SymbolicSystem::sft1d(2, {SymbolicSystem::word("11")});
  const auto balls3 = enumerate_balls(gm, TargetSet::whole(), box_folner(1, 3), EpsilonLevel(0));
  std::set<Pattern> got;
  for (const auto& b : balls3) got.insert(b.symbols);
  REQUIRE(got == std::set<Pattern>{{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {1, 0, 0}, {1, 0, 1}});

  const Cylinder pin0{std::make_shared<const std::vector<GroupElement>>(
                          std::vector<GroupElement>{GroupElement{0}}),
                      {0}};
  const auto restricted =
      enumerate_balls(full, TargetSet::clopen({pin0}), f2, EpsilonLevel(0));
  REQUIRE(restricted.size() == 2);
  for (const auto& b : restricted) REQUIRE(b.symbols[0] == 0);
}

TEST_CASE("partition property and shrinking balls") {
  const auto sys = SymbolicSystem::full_shift(3, 1);
  const auto f2 = box_folner(1, 2);
  const auto w = bowen_window(f2, EpsilonLevel(1));
  const auto balls = enumerate_balls(sys, TargetSet::whole(), f2, EpsilonLevel(1));
  REQUIRE(balls.size() == static_cast<std::size_t>(std::pow(3, w.size())));

  const auto x = constant_config(sys, 2);
  const auto small = ball_of(x, f2, EpsilonLevel(2));
  const auto large = ball_of(x, f2, EpsilonLevel(1));
  REQUIRE(balls_relation(sys, small, large) == BallsRelation::Nested);
  REQUIRE(small.support->size() > large.support->size());
}

TEST_CASE("golden-mean word counts follow the Fibonacci recurrence") {
  const auto gm = SymbolicSystem::sft1d(2, {SymbolicSystem::word("11")});
  std::vector<std::size_t> counts;
  for (int n = 1; n <= 15; ++n) {
    const auto balls =
        enumerate_balls(gm, TargetSet::whole(), box_folner(1, n), EpsilonLevel(0));
    counts.push_back(balls.size());
  }
  REQUIRE(counts[0] == 2);
  REQUIRE(counts[1] == 3);
  for (std::size_t n = 2; n < counts.size(); ++n)
    REQUIRE(counts[n] == counts[n - 1] + counts[n - 2]);
}

TEST_CASE("SFT validity checks") {
  REQUIRE_THROWS_AS(
      SymbolicSystem::sft1d(2, {SymbolicSystem::word("0"), SymbolicSystem::word("1")}),
      std::invalid_argument);

  const auto gm = SymbolicSystem::sft1d(2, {SymbolicSystem::word("11")});
  REQUIRE_THROWS_AS(Configuration::periodic(gm, SymbolicSystem::word("1"), GroupElement{1}),
                    std::invalid_argument);
  const auto ok = Configuration::periodic(gm, SymbolicSystem::word("10"), GroupElement{2});
  REQUIRE(ok.at(GroupElement{0}) == 1);
  REQUIRE(ok.at(GroupElement{1}) == 0);
  REQUIRE(ok.at(GroupElement{-1}) == 0);

  // Non-contiguous support: 1 at 0 and 1 at 2 forces the gap symbol to 0.
  const std::vector<GroupElement> gap_support{GroupElement{0}, GroupElement{2}};
  REQUIRE(gm.extendable(gap_support, Pattern{1, 1}));
  const std::vector<GroupElement> tight{GroupElement{0}, GroupElement{1}};
  REQUIRE_FALSE(gm.extendable(tight, Pattern{1, 1}));
}

TEST_CASE("lazy configurations are reproducible") {
  const auto sys = SymbolicSystem::full_shift(2, 2);
  auto cfg = Configuration::lazy(
      sys,
      [](const GroupElement& g) {
        return static_cast<Symbol>(detail::hash_combine(7, detail::hash_combine(
                                                               static_cast<std::uint64_t>(
                                                                   g.coords[0] + 1000),
                                                               static_cast<std::uint64_t>(
                                                                   g.coords[1] + 1000))) &
                                   1);
      },
      7);
  std::vector<Symbol> first, second;
  for (int i = 0; i < 10; ++i) first.push_back(cfg.at(GroupElement{i, -i}));
  for (int i = 0; i < 10; ++i) second.push_back(cfg.at(GroupElement{i, -i}));
  REQUIRE(first == second);
}
