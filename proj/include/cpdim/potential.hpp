#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cpdim/group.hpp"
#include "cpdim/rational.hpp"
#include "cpdim/symbolic.hpp"

namespace cpdim {

// Positive potential determined by the pattern on the window {|g| <= r}.
// Table values are exact rationals; sums are evaluated in double with the
// rational value available where exactness matters.
class Potential {
 public:
  Potential(const SymbolicSystem& sys, int window_radius,
            std::vector<std::pair<Pattern, Rational>> entries)
      : radius_(window_radius), dimension_(sys.dimension()) {
    if (window_radius < 0) throw std::invalid_argument("Potential: negative radius");
    window_ = word_ball(sys.dimension(), window_radius).elements();
    const auto valid = sys.enumerate_patterns(window_, 1u << 22);
    for (auto& [pat, val] : entries) {
      if (pat.size() != window_.size())
        throw std::invalid_argument("Potential: pattern length must match window");
      if (val <= 0) throw std::invalid_argument("Potential: values must be positive");
      if (!table_.emplace(std::move(pat), val).second)
        throw std::invalid_argument("Potential: duplicate pattern");
    }
    if (table_.size() != valid.size())
      throw std::invalid_argument("Potential: table must cover exactly the valid patterns");
    for (const auto& pat : valid)
      if (table_.find(pat) == table_.end())
        throw std::invalid_argument("Potential: table missing a valid pattern");
    phi_hat_ = table_.begin()->second;
    phi_max_ = table_.begin()->second;
    for (const auto& [pat, val] : table_) {
      phi_hat_ = std::min(phi_hat_, val);
      phi_max_ = std::max(phi_max_, val);
    }
  }

  static Potential constant(const SymbolicSystem& sys, const Rational& value) {
    std::vector<std::pair<Pattern, Rational>> entries;
    for (Symbol s = 0; s < sys.alphabet(); ++s) entries.push_back({Pattern{s}, value});
    return Potential(sys, 0, std::move(entries));
  }

  static Potential per_symbol(const SymbolicSystem& sys, std::vector<Rational> values) {
    if (values.size() != static_cast<std::size_t>(sys.alphabet()))
      throw std::invalid_argument("per_symbol: one value per letter required");
    std::vector<std::pair<Pattern, Rational>> entries;
    for (Symbol s = 0; s < sys.alphabet(); ++s)
      entries.push_back({Pattern{s}, values[s]});
    return Potential(sys, 0, std::move(entries));
  }

  int window_radius() const { return radius_; }
  const std::vector<GroupElement>& window() const { return window_; }
  const Rational& phi_hat() const { return phi_hat_; }
  const Rational& phi_max() const { return phi_max_; }

  const Rational& value(const Pattern& local) const {
    const auto it = table_.find(local);
    if (it == table_.end())
      throw std::runtime_error("Potential: pattern missing from table");
    return it->second;
  }

  // Phi_F(x) = sum over g in F of phi((g x)|window), exact.
  Rational birkhoff_sum_exact(const Configuration& x, const FiniteSubset& f) const {
    Rational acc = 0;
    Pattern local(window_.size(), 0);
    for (const auto& g : f.elements()) {
      for (std::size_t i = 0; i < window_.size(); ++i) local[i] = x.at(g + window_[i]);
      acc += value(local);
    }
    return acc;
  }

  double birkhoff_sum(const Configuration& x, const FiniteSubset& f) const {
    return to_double(birkhoff_sum_exact(x, f));
  }

  // Exact extremum of Phi_F over a Bowen ball: coordinates of F+window inside
  // the ball support are pinned, the rest range over all jointly extendable
  // completions.
  Rational ball_extremum_exact(const SymbolicSystem& sys, const Cylinder& ball,
                               const FiniteSubset& f, bool maximize,
                               std::size_t completion_cap = (1u << 20)) const {
    // Collect the coordinates the sum reads.
    std::vector<GroupElement> reads;
    for (const auto& g : f.elements())
      for (const auto& w : window_) reads.push_back(g + w);
    std::sort(reads.begin(), reads.end());
    reads.erase(std::unique(reads.begin(), reads.end()), reads.end());

    std::vector<GroupElement> free_pts;
    for (const auto& g : reads)
      if (!ball.symbol_at(g)) free_pts.push_back(g);

    if (free_pts.empty()) {
      Rational acc = 0;
      Pattern local(window_.size(), 0);
      for (const auto& g : f.elements()) {
        for (std::size_t i = 0; i < window_.size(); ++i)
          local[i] = *ball.symbol_at(g + window_[i]);
        acc += value(local);
      }
      return acc;
    }

    // Joint support: ball support plus the free coordinates, canonical order.
    std::vector<GroupElement> joint = *ball.support;
    joint.insert(joint.end(), free_pts.begin(), free_pts.end());
    std::sort(joint.begin(), joint.end());
    std::vector<std::size_t> free_slots;
    Pattern assignment(joint.size(), 0);
    for (std::size_t i = 0; i < joint.size(); ++i) {
      if (const auto s = ball.symbol_at(joint[i]))
        assignment[i] = *s;
      else
        free_slots.push_back(i);
    }

    std::size_t total = 1;
    for (std::size_t i = 0; i < free_slots.size(); ++i) {
      total *= static_cast<std::size_t>(sys.alphabet());
      if (total > completion_cap)
        throw std::runtime_error("ball_extremum: completion budget exceeded");
    }

    std::optional<Rational> best;
    std::vector<Symbol> digits(free_slots.size(), 0);
    auto lookup = [&](const GroupElement& g) {
      const auto it = std::lower_bound(joint.begin(), joint.end(), g);
      return assignment[static_cast<std::size_t>(it - joint.begin())];
    };
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      for (std::size_t i = 0; i < free_slots.size(); ++i) {
        digits[i] = static_cast<Symbol>(c % sys.alphabet());
        c /= static_cast<std::size_t>(sys.alphabet());
        assignment[free_slots[i]] = digits[i];
      }
      if (!sys.extendable(joint, assignment)) continue;
      Rational acc = 0;
      Pattern local(window_.size(), 0);
      for (const auto& g : f.elements()) {
        for (std::size_t i = 0; i < window_.size(); ++i) local[i] = lookup(g + window_[i]);
        acc += value(local);
      }
      if (!best || (maximize ? acc > *best : acc < *best)) best = acc;
    }
    if (!best) throw std::runtime_error("ball_extremum: no valid completion");
    return *best;
  }

  double ball_sup(const SymbolicSystem& sys, const Cylinder& ball, const FiniteSubset& f) const {
    return to_double(ball_extremum_exact(sys, ball, f, /*maximize=*/true));
  }

  double ball_inf(const SymbolicSystem& sys, const Cylinder& ball, const FiniteSubset& f) const {
    return to_double(ball_extremum_exact(sys, ball, f, /*maximize=*/false));
  }

  // Phi_eps = sup{|phi(x)-phi(y)| : d(x,y) < 2 eps}: max over valid window
  // pairs agreeing on {|g| <= m-1}; zero when r < m.
  Rational oscillation(EpsilonLevel eps) const {
    if (radius_ < eps.m) return 0;
    const int agree_radius = eps.m - 1;
    // Group patterns by their restriction to the agreement window.
    std::vector<std::size_t> agree_idx;
    for (std::size_t i = 0; i < window_.size(); ++i)
      if (window_[i].norm() <= agree_radius) agree_idx.push_back(i);
    std::map<Pattern, std::pair<Rational, Rational>> groups;  // key -> (min, max)
    for (const auto& [pat, val] : table_) {
      Pattern key;
      key.reserve(agree_idx.size());
      for (auto i : agree_idx) key.push_back(pat[i]);
      const auto it = groups.find(key);
      if (it == groups.end())
        groups.emplace(std::move(key), std::make_pair(val, val));
      else {
        it->second.first = std::min(it->second.first, val);
        it->second.second = std::max(it->second.second, val);
      }
    }
    Rational osc = 0;
    for (const auto& [key, mm] : groups) {
      const Rational spread = mm.second - mm.first;
      osc = std::max(osc, spread);
    }
    return osc;
  }

 private:
  int radius_;
  int dimension_;
  std::vector<GroupElement> window_;
  std::map<Pattern, Rational> table_;
  Rational phi_hat_, phi_max_;
};

}  // namespace cpdim
