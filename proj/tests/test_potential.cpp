#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cpdim/detail/util.hpp"
#include "cpdim/potential.hpp"

using namespace cpdim;

namespace {

const SymbolicSystem& binary() {
  static const auto sys = SymbolicSystem::full_shift(2, 1);
  return sys;
}

Configuration periodic01(const SymbolicSystem& sys) {
  return Configuration::periodic(sys, SymbolicSystem::word("01"), GroupElement{2});
}

// phi = 1 + (symbol at +1), window radius 1 on the binary full shift.
Potential successor_potential(const SymbolicSystem& sys) {
  std::vector<std::pair<Pattern, Rational>> entries;
  for (Symbol a = 0; a < 2; ++a)
    for (Symbol b = 0; b < 2; ++b)
      for (Symbol c = 0; c < 2; ++c)
        entries.push_back({Pattern{a, b, c}, Rational(1 + c)});
  return Potential(sys, 1, std::move(entries));
}

}  // namespace

TEST_CASE("birkhoff sums") {
  const auto& sys = binary();
  const auto ones = Potential::constant(sys, 1);
  const auto x = periodic01(sys);
  REQUIRE(ones.birkhoff_sum_exact(x, box_folner(1, 5)) == Rational(5));

  const auto succ = Potential::per_symbol(sys, {Rational(1), Rational(2)});
  REQUIRE(succ.birkhoff_sum_exact(x, box_folner(1, 4)) == Rational(6));

  const auto all1 = Configuration::periodic(sys, Pattern{1}, GroupElement{1});
  const auto doubler = Potential::per_symbol(sys, {Rational(2), Rational(2)});
  REQUIRE(doubler.birkhoff_sum_exact(all1, box_folner(1, 3)) == Rational(6));
}

TEST_CASE("birkhoff additivity over disjoint unions") {
  const auto& sys = binary();
  const auto succ = Potential::per_symbol(sys, {Rational(1, 3), Rational(7, 2)});
  const auto x = periodic01(sys);
  const FiniteSubset f1(1, {GroupElement{0}, GroupElement{1}, GroupElement{4}});
  const FiniteSubset f2(1, {GroupElement{2}, GroupElement{7}});
  const FiniteSubset all(1, {GroupElement{0}, GroupElement{1}, GroupElement{2},
                             GroupElement{4}, GroupElement{7}});
  REQUIRE(succ.birkhoff_sum_exact(x, all) ==
          succ.birkhoff_sum_exact(x, f1) + succ.birkhoff_sum_exact(x, f2));
}

TEST_CASE("ball_sup pins and maximizes") {
  const auto& sys = binary();
  const auto phi = successor_potential(sys);
  const FiniteSubset origin(1, {GroupElement{0}});

  // Ball "0" on {0} at m = 0: coordinate +1 free, sup over it gives 2.
  const auto zero = Configuration::periodic(sys, Pattern{0}, GroupElement{1});
  const auto ball = ball_of(zero, origin, EpsilonLevel(0));
  REQUIRE(phi.ball_extremum_exact(sys, ball, origin, true) == Rational(2));
  REQUIRE(phi.ball_extremum_exact(sys, ball, origin, false) == Rational(1));

  // Ball "00" on {0,1}: the read coordinate is pinned to 0.
  const Cylinder ball00{std::make_shared<const std::vector<GroupElement>>(
                            std::vector<GroupElement>{GroupElement{0}, GroupElement{1}}),
                        {0, 0}};
  REQUIRE(phi.ball_extremum_exact(sys, ball00, origin, true) == Rational(1));

  // r = 0 <= m: sup equals the center sum.
  const auto r0 = Potential::per_symbol(sys, {Rational(1), Rational(2)});
  const auto x = periodic01(sys);
  const auto f3 = box_folner(1, 3);
  const auto b = ball_of(x, f3, EpsilonLevel(0));
  REQUIRE(r0.ball_extremum_exact(sys, b, f3, true) == r0.birkhoff_sum_exact(x, f3));
}

TEST_CASE("oscillation") {
  const auto& sys = binary();
  const auto c = Potential::constant(sys, Rational(5, 3));
  REQUIRE(c.oscillation(EpsilonLevel(0)) == Rational(0));
  REQUIRE(c.oscillation(EpsilonLevel(3)) == Rational(0));

  const auto r0 = Potential::per_symbol(sys, {Rational(1), Rational(2)});
  REQUIRE(r0.oscillation(EpsilonLevel(1)) == Rational(0));  // r < m
  REQUIRE(r0.oscillation(EpsilonLevel(0)) == Rational(1));

  const auto succ = successor_potential(sys);
  REQUIRE(succ.oscillation(EpsilonLevel(2)) == Rational(0));
  REQUIRE(succ.oscillation(EpsilonLevel(1)) == Rational(1));  // +1 coordinate free
}

TEST_CASE("sandwich inequality on randomized instances") {
  const auto& sys = binary();
  const auto phi = successor_potential(sys);
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const int m = static_cast<int>(rng() % 3);
    const auto f = box_folner(1, n);
    const std::uint64_t seed = rng();
    const auto x = Configuration::lazy(
        sys,
        [seed](const GroupElement& g) {
          return static_cast<Symbol>(
              detail::hash_combine(seed, static_cast<std::uint64_t>(g.coords[0] + (1 << 20))) & 1);
        },
        seed);
    const auto ball = ball_of(x, f, EpsilonLevel(m));
    const Rational center = phi.birkhoff_sum_exact(x, f);
    const Rational sup = phi.ball_extremum_exact(sys, ball, f, true);
    const Rational gap = sup - center;
    REQUIRE(gap >= 0);
    REQUIRE(gap <= Rational(static_cast<int>(f.size())) * phi.oscillation(EpsilonLevel(m)));
    if (phi.window_radius() <= m) REQUIRE(gap == 0);
    REQUIRE(center >= Rational(static_cast<int>(f.size())) * phi.phi_hat());
  }
}

TEST_CASE("potential table validation") {
  const auto& sys = binary();
  REQUIRE_THROWS_AS(Potential::per_symbol(sys, {Rational(0), Rational(1)}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(Potential(sys, 0, {{Pattern{0}, Rational(1)}}), std::invalid_argument);

  // Golden-mean SFT at radius 1: only valid windows may appear.
  const auto gm = SymbolicSystem::sft1d(2, {SymbolicSystem::word("11")});
  std::vector<std::pair<Pattern, Rational>> entries;
  for (Symbol a = 0; a < 2; ++a)
    for (Symbol b = 0; b < 2; ++b)
      for (Symbol c = 0; c < 2; ++c) {
        if ((a == 1 && b == 1) || (b == 1 && c == 1)) continue;
        entries.push_back({Pattern{a, b, c}, Rational(1)});
      }
  REQUIRE_NOTHROW(Potential(gm, 1, entries));
  entries.push_back({Pattern{1, 1, 1}, Rational(1)});
  REQUIRE_THROWS_AS(Potential(gm, 1, entries), std::invalid_argument);
}
