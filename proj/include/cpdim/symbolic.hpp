#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "cpdim/detail/util.hpp"
#include "cpdim/group.hpp"

namespace cpdim {

using Symbol = std::uint8_t;
using Pattern = std::vector<Symbol>;  // symbols aligned with a sorted support

// eps level m stands for any eps strictly between 2^-(m+1) and 2^-m; at such
// eps the open and closed Bowen balls coincide as cylinders.
struct EpsilonLevel {
  int m = 0;
  explicit EpsilonLevel(int level) : m(level) {
    if (m < 0) throw std::invalid_argument("EpsilonLevel: m must be >= 0");
  }
};

namespace detail {

// De Bruijn graph of words of length `order`; transitions append one symbol.
// Core states are those on bi-infinite valid paths.
class Sft1dGraph {
 public:
  Sft1dGraph(int alphabet, const std::vector<Pattern>& forbidden) : k_(alphabet) {
    std::size_t max_len = 1;
    for (const auto& w : forbidden) {
      if (w.empty()) throw std::invalid_argument("SFT: empty forbidden word");
      max_len = std::max(max_len, w.size());
    }
    order_ = static_cast<int>(max_len) - 1;
    std::size_t nstates = 1;
    for (int i = 0; i < order_; ++i) nstates *= static_cast<std::size_t>(k_);
    step_.assign(nstates * k_, -1);
    for (std::size_t s = 0; s < nstates; ++s) {
      Pattern word = decode(s);
      for (Symbol c = 0; c < k_; ++c) {
        Pattern ext = word;
        ext.push_back(c);
        if (!contains_forbidden(ext, forbidden)) {
          std::size_t next = 0;
          for (int i = 1; i <= order_; ++i) next = next * k_ + ext[i];
          step_[s * k_ + c] = static_cast<std::int64_t>(order_ == 0 ? 0 : next);
        }
      }
    }
    // A state is forward-core if it reaches a cycle, backward-core if a cycle
    // reaches it; prune by repeatedly removing sources/sinks.
    forward_core_ = trim(false);
    backward_core_ = trim(true);
    core_.resize(nstates);
    bool any = false;
    for (std::size_t s = 0; s < nstates; ++s) {
      core_[s] = forward_core_[s] && backward_core_[s];
      any = any || core_[s];
    }
    if (!any) throw std::invalid_argument("SFT: no valid bi-infinite configuration");
  }

  int order() const { return order_; }
  std::size_t num_states() const { return core_.size(); }
  std::int64_t step(std::size_t state, Symbol c) const { return step_[state * k_ + c]; }
  bool is_core(std::size_t s) const { return core_[s]; }

  std::size_t encode(const Pattern& word) const {
    std::size_t s = 0;
    for (int i = 0; i < order_; ++i) s = s * k_ + word[i];
    return s;
  }

  Pattern decode(std::size_t state) const {
    Pattern w(static_cast<std::size_t>(order_), 0);
    for (int i = order_ - 1; i >= 0; --i) {
      w[static_cast<std::size_t>(i)] = static_cast<Symbol>(state % k_);
      state /= k_;
    }
    return w;
  }

 private:
  static bool contains_forbidden(const Pattern& w, const std::vector<Pattern>& forbidden) {
    for (const auto& f : forbidden) {
      if (f.size() > w.size()) continue;
      for (std::size_t i = 0; i + f.size() <= w.size(); ++i)
        if (std::equal(f.begin(), f.end(), w.begin() + static_cast<std::ptrdiff_t>(i)))
          return true;
    }
    return false;
  }

  std::vector<char> trim(bool backward) const {
    const std::size_t n = step_.size() / k_;
    std::vector<int> deg(n, 0);
    std::vector<char> alive(n, 1);
    auto count = [&](std::size_t s) {
      int d = 0;
      if (!backward) {
        for (Symbol c = 0; c < k_; ++c) {
          const auto t = step_[s * k_ + c];
          if (t >= 0 && alive[static_cast<std::size_t>(t)]) ++d;
        }
      } else {
        for (std::size_t u = 0; u < n; ++u) {
          if (!alive[u]) continue;
          for (Symbol c = 0; c < k_; ++c)
            if (step_[u * k_ + c] == static_cast<std::int64_t>(s)) ++d;
        }
      }
      return d;
    };
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t s = 0; s < n; ++s) {
        if (alive[s] && count(s) == 0) {
          alive[s] = 0;
          changed = true;
        }
      }
    }
    (void)deg;
    return alive;
  }

  int k_;
  int order_ = 0;
  std::vector<std::int64_t> step_;
  std::vector<char> forward_core_, backward_core_, core_;
};

}  // namespace detail

// Full shift over Z^d or a 1-D subshift of finite type given by forbidden words.
class SymbolicSystem {
 public:
  static SymbolicSystem full_shift(int alphabet, int dimension) {
    return SymbolicSystem(alphabet, dimension, {});
  }
  static SymbolicSystem sft1d(int alphabet, std::vector<Pattern> forbidden) {
    if (forbidden.empty())
      throw std::invalid_argument("sft1d: use full_shift for no constraints");
    return SymbolicSystem(alphabet, 1, std::move(forbidden));
  }
  static Pattern word(const std::string& digits) {
    Pattern p;
    p.reserve(digits.size());
    for (char c : digits) {
      if (c < '0' || c > '9') throw std::invalid_argument("word: digits only");
      p.push_back(static_cast<Symbol>(c - '0'));
    }
    return p;
  }

  int alphabet() const { return alphabet_; }
  int dimension() const { return dimension_; }
  bool is_full_shift() const { return graph_ == nullptr; }
  const detail::Sft1dGraph* graph() const { return graph_.get(); }

  // Extendability of a partial pattern (1-D: automaton sweep over the hull
  // with pinned and free positions; full shift: always true).
  bool extendable(const std::vector<GroupElement>& support, const Pattern& symbols) const {
    if (support.size() != symbols.size())
      throw std::invalid_argument("extendable: support/symbol size mismatch");
    for (Symbol s : symbols)
      if (s >= alphabet_) throw std::invalid_argument("extendable: symbol out of range");
    if (is_full_shift()) return true;
    if (support.empty()) return true;
    const std::int32_t lo = support.front().coords[0];
    const std::int32_t hi = support.back().coords[0];
    std::vector<std::int16_t> pinned(static_cast<std::size_t>(hi - lo + 1), -1);
    for (std::size_t i = 0; i < support.size(); ++i)
      pinned[static_cast<std::size_t>(support[i].coords[0] - lo)] =
          static_cast<std::int16_t>(symbols[i]);
    return sweep_feasible(pinned);
  }

  // All valid assignments on `support` (lex order); SFT only emits extendable
  // patterns. Throws if the count would exceed `cap`.
  std::vector<Pattern> enumerate_patterns(const std::vector<GroupElement>& support,
                                          std::size_t cap) const {
    std::vector<Pattern> out;
    Pattern cur(support.size(), 0);
    enumerate_rec(support, 0, cur, out, cap);
    return out;
  }

 private:
  SymbolicSystem(int alphabet, int dimension, std::vector<Pattern> forbidden)
      : alphabet_(static_cast<Symbol>(alphabet)), dimension_(dimension) {
    if (alphabet < 2 || alphabet > 250)
      throw std::invalid_argument("SymbolicSystem: alphabet size out of range");
    if (dimension < 1 || dimension > kMaxDimension)
      throw std::invalid_argument("SymbolicSystem: dimension out of range");
    if (!forbidden.empty()) {
      if (dimension != 1)
        throw std::invalid_argument("SymbolicSystem: SFT constraints require d = 1");
      for (const auto& w : forbidden)
        for (Symbol s : w)
          if (s >= alphabet_)
            throw std::invalid_argument("SymbolicSystem: forbidden word symbol out of range");
      graph_ = std::make_shared<detail::Sft1dGraph>(alphabet, forbidden);
    }
  }

  // Feasibility of a hull assignment where -1 marks a free cell.
  bool sweep_feasible(const std::vector<std::int16_t>& pinned) const {
    const auto& g = *graph_;
    const std::size_t nstates = g.num_states();
    std::vector<char> cur(nstates, 0);
    for (std::size_t s = 0; s < nstates; ++s) cur[s] = g.is_core(s) ? 1 : 0;
    for (std::int16_t cell : pinned) {
      std::vector<char> next(nstates, 0);
      bool any = false;
      for (std::size_t s = 0; s < nstates; ++s) {
        if (!cur[s]) continue;
        const Symbol clo = cell >= 0 ? static_cast<Symbol>(cell) : 0;
        const Symbol chi = cell >= 0 ? static_cast<Symbol>(cell) : static_cast<Symbol>(alphabet_ - 1);
        for (Symbol c = clo; c <= chi; ++c) {
          const auto t = g.step(s, c);
          if (t >= 0 && g.is_core(static_cast<std::size_t>(t))) {
            next[static_cast<std::size_t>(t)] = 1;
            any = true;
          }
          if (c == 255) break;
        }
      }
      if (!any) return false;
      cur.swap(next);
    }
    return true;
  }

  void enumerate_rec(const std::vector<GroupElement>& support, std::size_t idx, Pattern& cur,
                     std::vector<Pattern>& out, std::size_t cap) const {
    if (idx == support.size()) {
      if (out.size() >= cap)
        throw std::runtime_error("enumerate_patterns: universe cap exceeded");
      out.push_back(cur);
      return;
    }
    for (Symbol c = 0; c < alphabet_; ++c) {
      cur[idx] = c;
      // Prefix pruning: check extendability of the partial assignment.
      if (is_full_shift() || prefix_feasible(support, cur, idx + 1))
        enumerate_rec(support, idx + 1, cur, out, cap);
    }
    cur[idx] = 0;
  }

  bool prefix_feasible(const std::vector<GroupElement>& support, const Pattern& cur,
                       std::size_t filled) const {
    const std::int32_t lo = support.front().coords[0];
    const std::int32_t hi = support.back().coords[0];
    std::vector<std::int16_t> pinned(static_cast<std::size_t>(hi - lo + 1), -1);
    for (std::size_t i = 0; i < filled; ++i)
      pinned[static_cast<std::size_t>(support[i].coords[0] - lo)] =
          static_cast<std::int16_t>(cur[i]);
    return sweep_feasible(pinned);
  }

  Symbol alphabet_;
  int dimension_;
  std::shared_ptr<detail::Sft1dGraph> graph_;
};

// Clopen cylinder set: pinned symbols on a canonical sorted support.
struct Cylinder {
  std::shared_ptr<const std::vector<GroupElement>> support;
  Pattern symbols;

  const std::vector<GroupElement>& support_points() const { return *support; }

  std::optional<Symbol> symbol_at(const GroupElement& g) const {
    const auto& pts = *support;
    const auto it = std::lower_bound(pts.begin(), pts.end(), g);
    if (it == pts.end() || *it != g) return std::nullopt;
    return symbols[static_cast<std::size_t>(it - pts.begin())];
  }

  bool operator==(const Cylinder& o) const {
    return *support == *o.support && symbols == o.symbols;
  }
};

inline std::shared_ptr<const std::vector<GroupElement>> make_support(const FiniteSubset& f) {
  return std::make_shared<const std::vector<GroupElement>>(f.elements());
}

enum class BallsRelation { Disjoint, Nested, Overlapping };

// Relation of two cylinders as subsets of the system.
inline BallsRelation balls_relation(const SymbolicSystem& sys, const Cylinder& a,
                                    const Cylinder& b) {
  bool conflict = false;
  std::size_t shared = 0;
  for (std::size_t i = 0; i < a.support->size(); ++i) {
    const auto sb = b.symbol_at((*a.support)[i]);
    if (!sb) continue;
    ++shared;
    if (*sb != a.symbols[i]) conflict = true;
  }
  if (conflict) return BallsRelation::Disjoint;
  if (shared == a.support->size() || shared == b.support->size()) {
    // One support inside the other with agreeing symbols.
    return BallsRelation::Nested;
  }
  if (!sys.is_full_shift()) {
    // Joint extension must itself be a valid pattern.
    std::vector<GroupElement> joint = *a.support;
    Pattern sym = a.symbols;
    for (std::size_t i = 0; i < b.support->size(); ++i) {
      if (!a.symbol_at((*b.support)[i])) {
        joint.push_back((*b.support)[i]);
        sym.push_back(b.symbols[i]);
      }
    }
    std::vector<std::size_t> order(joint.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return joint[x] < joint[y]; });
    std::vector<GroupElement> js;
    Pattern jp;
    for (auto i : order) {
      js.push_back(joint[i]);
      jp.push_back(sym[i]);
    }
    if (!sys.extendable(js, jp)) return BallsRelation::Disjoint;
  }
  return BallsRelation::Overlapping;
}

// Configuration: a total assignment Z^d -> alphabet readable coordinate-wise.
// Periodic patterns are validated against the system; lazy random ones draw
// each coordinate from a deterministic hash so reads commute.
class Configuration {
 public:
  using Sampler = std::function<Symbol(const GroupElement&)>;

  static Configuration periodic(const SymbolicSystem& sys, const Pattern& pattern,
                                const GroupElement& period) {
    if (pattern.empty()) throw std::invalid_argument("periodic: empty pattern");
    for (int i = 0; i < sys.dimension(); ++i)
      if (period.coords[i] <= 0)
        throw std::invalid_argument("periodic: period must be positive in each axis");
    if (sys.dimension() == 1) {
      if (static_cast<std::size_t>(period.coords[0]) != pattern.size())
        throw std::invalid_argument("periodic: 1-D period must equal pattern length");
      if (!sys.is_full_shift()) {
        // Validity of the bi-infinite periodic word: repeat enough periods to
        // expose every wrap-around factor up to the longest forbidden word.
        const std::size_t flen = static_cast<std::size_t>(sys.graph()->order()) + 1;
        const std::size_t reps = std::max<std::size_t>(2, (flen + pattern.size() - 1) / pattern.size() + 1);
        std::vector<GroupElement> sup;
        Pattern repeated;
        for (std::size_t i = 0; i < reps * pattern.size(); ++i) {
          sup.emplace_back(static_cast<std::int32_t>(i));
          repeated.push_back(pattern[i % pattern.size()]);
        }
        if (!sys.extendable(sup, repeated))
          throw std::invalid_argument("periodic: pattern invalid for the system");
      }
    } else {
      const std::size_t cells = static_cast<std::size_t>(period.coords[0]) *
                                (sys.dimension() >= 2 ? period.coords[1] : 1) *
                                (sys.dimension() >= 3 ? period.coords[2] : 1);
      if (cells != pattern.size())
        throw std::invalid_argument("periodic: pattern size must match the period box");
    }
    Configuration cfg;
    cfg.kind_ = Kind::Periodic;
    cfg.pattern_ = pattern;
    cfg.period_ = period;
    cfg.dimension_ = sys.dimension();
    return cfg;
  }

  static Configuration lazy(const SymbolicSystem& sys, Sampler sampler, std::uint64_t seed) {
    Configuration cfg;
    cfg.kind_ = Kind::Lazy;
    cfg.sampler_ = std::move(sampler);
    cfg.seed_ = seed;
    cfg.dimension_ = sys.dimension();
    cfg.cache_ = std::make_shared<Cache>();
    return cfg;
  }

  Symbol at(const GroupElement& g) const {
    if (kind_ == Kind::Periodic) {
      std::size_t idx = 0;
      for (int i = 0; i < dimension_; ++i) {
        const std::int32_t p = period_.coords[i];
        std::int32_t r = g.coords[i] % p;
        if (r < 0) r += p;
        idx = idx * static_cast<std::size_t>(p) + static_cast<std::size_t>(r);
      }
      return pattern_[idx];
    }
    std::lock_guard<std::mutex> lock(cache_->mu);
    const auto it = cache_->values.find(g);
    if (it != cache_->values.end()) return it->second;
    const Symbol s = sampler_(g);
    cache_->values.emplace(g, s);
    return s;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  enum class Kind { Periodic, Lazy };
  struct Cache {
    std::mutex mu;
    std::map<GroupElement, Symbol> values;
  };

  Kind kind_ = Kind::Periodic;
  Pattern pattern_;
  GroupElement period_{1, 1, 1};
  int dimension_ = 1;
  Sampler sampler_;
  std::uint64_t seed_ = 0;
  std::shared_ptr<Cache> cache_;
};

// Smallest |g| <= probe_radius where x and y differ.
struct MetricLevel {
  std::optional<int> level;  // empty: identical within the probe
};

inline MetricLevel metric_level(const Configuration& x, const Configuration& y,
                                int probe_radius, int dimension) {
  if (probe_radius < 0) throw std::invalid_argument("metric_level: negative radius");
  for (int r = 0; r <= probe_radius; ++r) {
    const FiniteSubset shell = word_ball(dimension, r);
    for (const auto& g : shell.elements()) {
      if (g.norm() != r) continue;
      if (x.at(g) != y.at(g)) return MetricLevel{r};
    }
  }
  return MetricLevel{};
}

// Agreement window for d_F < eps at level m: F + {|g| <= m}. With the dyadic
// eps convention this is also the closed-ball window.
inline FiniteSubset bowen_window(const FiniteSubset& f, EpsilonLevel eps) {
  if (f.empty()) throw std::invalid_argument("bowen_window: empty F");
  return f.sum(word_ball(f.dimension(), eps.m));
}

inline Cylinder ball_of(const Configuration& x, const FiniteSubset& f, EpsilonLevel eps) {
  const FiniteSubset window = bowen_window(f, eps);
  auto support = make_support(window);
  Pattern symbols;
  symbols.reserve(support->size());
  for (const auto& g : *support) symbols.push_back(x.at(g));
  return Cylinder{std::move(support), std::move(symbols)};
}

// Target set H: the whole system or a clopen set (finite union of cylinders).
struct TargetSet {
  std::vector<Cylinder> pieces;  // empty: the whole system

  static TargetSet whole() { return {}; }
  static TargetSet clopen(std::vector<Cylinder> parts) {
    if (parts.empty()) throw std::invalid_argument("TargetSet: empty union");
    return TargetSet{std::move(parts)};
  }
  bool is_whole() const { return pieces.empty(); }

  bool meets(const SymbolicSystem& sys, const Cylinder& ball) const {
    if (is_whole()) return true;
    for (const auto& piece : pieces)
      if (balls_relation(sys, ball, piece) != BallsRelation::Disjoint) return true;
    return false;
  }
};

// All distinct Bowen balls {ball_of(x, F, eps) : x in H}: the valid patterns
// on the window whose cylinder meets H. The center set of a ball is the ball
// itself, so "meets H" and "has a center in H" coincide.
inline std::vector<Cylinder> enumerate_balls(const SymbolicSystem& sys, const TargetSet& h,
                                             const FiniteSubset& f, EpsilonLevel eps,
                                             std::size_t cap = 200000) {
  const FiniteSubset window = bowen_window(f, eps);
  auto support = make_support(window);
  std::vector<Cylinder> out;
  for (auto& pat : sys.enumerate_patterns(*support, cap)) {
    Cylinder ball{support, std::move(pat)};
    if (h.meets(sys, ball)) out.push_back(std::move(ball));
  }
  return out;
}

}  // namespace cpdim
