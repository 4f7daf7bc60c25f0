#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cpdim/measures.hpp"
#include "cpdim/potential.hpp"
#include "cpdim/symbolic.hpp"

namespace cpdim {

enum class GaugeKind {
  BS,           // weight exp(-s * Phi-term)
  Pressure,     // weight exp(-s |F_n| + Phi-term)
  PressureNeg,  // weight exp(-s |F_n| - t * Phi-term)
};

enum class PhiTerm { CenterValue, BallSup };

struct GaugeSpec {
  GaugeKind kind = GaugeKind::BS;
  PhiTerm phi_term = PhiTerm::BallSup;
  double t = 0.0;  // parameter of the PressureNeg family

  static GaugeSpec bs(PhiTerm term = PhiTerm::BallSup) { return {GaugeKind::BS, term, 0.0}; }
  static GaugeSpec pressure(PhiTerm term = PhiTerm::CenterValue) {
    return {GaugeKind::Pressure, term, 0.0};
  }
  static GaugeSpec pressure_neg(double t, PhiTerm term = PhiTerm::CenterValue) {
    return {GaugeKind::PressureNeg, term, t};
  }
};

struct DepthRange {
  int n_min = 1;
  int n_max = 1;
  DepthRange(int lo, int hi) : n_min(lo), n_max(hi) {
    if (lo < 1 || hi < lo) throw std::invalid_argument("DepthRange: need 1 <= N <= N_max");
  }
};

struct UniverseBudget {
  std::size_t ball_cap = 200000;
  std::size_t search_node_cap = 4000000;
  std::size_t atom_cap = 1u << 16;  // generic (non-nested) path only
};

enum class BoundSide { UpperBound, LowerBound, TwoSided, Heuristic };

inline const char* to_string(BoundSide b) {
  switch (b) {
    case BoundSide::UpperBound: return "upper_bound";
    case BoundSide::LowerBound: return "lower_bound";
    case BoundSide::TwoSided: return "two_sided";
    case BoundSide::Heuristic: return "heuristic";
  }
  return "?";
}

// The finite universe of candidate Bowen balls with n in [N, N_max], with
// Phi-terms cached per ball. When the windows form an inclusion chain (box
// Folner sequences) the universe is a forest under cylinder containment and
// the optimizers below run as exact tree DPs; otherwise they fall back to
// exact branch-and-bound over an atom decomposition.
class BallUniverse {
 public:
  struct Layer {
    int n = 1;                 // Folner index
    std::size_t folner_size = 0;
    FiniteSubset folner;
    std::shared_ptr<const std::vector<GroupElement>> support;
    std::vector<Pattern> patterns;         // canonical lex order
    std::vector<char> meets_h;
    std::vector<double> phi_center;        // min of Phi_F over the ball
    std::vector<double> phi_sup;           // max of Phi_F over the ball
    std::vector<std::int64_t> parent;      // index into previous layer (laminar)
    std::vector<std::vector<std::uint32_t>> children;
  };

  BallUniverse(const SymbolicSystem& sys, const FolnerSequence& folner, const TargetSet& h,
               const Potential& phi, EpsilonLevel eps, DepthRange depth,
               UniverseBudget budget = {})
      : sys_(&sys), phi_(&phi), eps_(eps), depth_(depth), budget_(budget) {
    std::size_t total = 0;
    for (int n = depth.n_min; n <= depth.n_max; ++n) {
      Layer layer;
      layer.n = n;
      layer.folner = folner.member(n);
      layer.folner_size = layer.folner.size();
      const FiniteSubset window = bowen_window(layer.folner, eps);
      layer.support = make_support(window);
      layer.patterns = sys.enumerate_patterns(*layer.support, budget.ball_cap - total);
      total += layer.patterns.size();
      layers_.push_back(std::move(layer));
    }
    // Phi-terms and H-marks.
    const bool pinned = phi.window_radius() <= eps.m;
    for (auto& layer : layers_) {
      const std::size_t count = layer.patterns.size();
      layer.meets_h.resize(count);
      layer.phi_center.resize(count);
      layer.phi_sup.resize(count);
      detail::parallel_for(count, [&](std::size_t i) {
        const Cylinder ball{layer.support, layer.patterns[i]};
        layer.meets_h[i] = h.meets(sys, ball) ? 1 : 0;
        if (pinned) {
          const Rational v = phi.ball_extremum_exact(sys, ball, layer.folner, true);
          layer.phi_center[i] = to_double(v);
          layer.phi_sup[i] = layer.phi_center[i];
        } else {
          layer.phi_center[i] =
              to_double(phi.ball_extremum_exact(sys, ball, layer.folner, false));
          layer.phi_sup[i] =
              to_double(phi.ball_extremum_exact(sys, ball, layer.folner, true));
        }
      });
    }
    build_forest();
  }

  const SymbolicSystem& system() const { return *sys_; }
  const Potential& potential() const { return *phi_; }
  EpsilonLevel eps() const { return eps_; }
  DepthRange depth() const { return depth_; }
  const UniverseBudget& budget() const { return budget_; }
  const std::vector<Layer>& layers() const { return layers_; }
  bool laminar() const { return laminar_; }

  std::size_t total_balls() const {
    std::size_t t = 0;
    for (const auto& l : layers_) t += l.patterns.size();
    return t;
  }

  Cylinder ball(std::size_t layer, std::size_t index) const {
    return Cylinder{layers_[layer].support, layers_[layer].patterns[index]};
  }

  double phi_term(std::size_t layer, std::size_t index, PhiTerm term) const {
    return term == PhiTerm::BallSup ? layers_[layer].phi_sup[index]
                                    : layers_[layer].phi_center[index];
  }

  // log-weight at gauge parameter s: a - s * b with b > 0.
  std::pair<double, double> gauge_terms(const GaugeSpec& g, std::size_t layer,
                                        std::size_t index) const {
    const double phi_v = phi_term(layer, index, g.phi_term);
    switch (g.kind) {
      case GaugeKind::BS:
        return {0.0, phi_v};
      case GaugeKind::Pressure:
        return {phi_v, static_cast<double>(layers_[layer].folner_size)};
      case GaugeKind::PressureNeg:
        return {-g.t * phi_v, static_cast<double>(layers_[layer].folner_size)};
    }
    return {0.0, 1.0};
  }

  double weight(const GaugeSpec& g, double s, std::size_t layer, std::size_t index) const {
    const auto [a, b] = gauge_terms(g, layer, index);
    return std::exp(a - s * b);
  }

 private:
  void build_forest() {
    laminar_ = true;
    for (std::size_t li = 1; li < layers_.size() && laminar_; ++li) {
      const auto& small = *layers_[li - 1].support;
      const auto& big = *layers_[li].support;
      for (const auto& g : small)
        if (!std::binary_search(big.begin(), big.end(), g)) {
          laminar_ = false;
          break;
        }
    }
    if (!laminar_ || layers_.empty()) return;
    for (std::size_t li = 1; li < layers_.size(); ++li) {
      auto& prev = layers_[li - 1];
      auto& cur = layers_[li];
      std::map<Pattern, std::uint32_t> index_of;
      for (std::size_t i = 0; i < prev.patterns.size(); ++i)
        index_of.emplace(prev.patterns[i], static_cast<std::uint32_t>(i));
      prev.children.assign(prev.patterns.size(), {});
      cur.parent.assign(cur.patterns.size(), -1);
      // Positions of the previous window inside the current one.
      std::vector<std::size_t> slots;
      slots.reserve(prev.support->size());
      for (const auto& g : *prev.support) {
        const auto it = std::lower_bound(cur.support->begin(), cur.support->end(), g);
        slots.push_back(static_cast<std::size_t>(it - cur.support->begin()));
      }
      for (std::size_t i = 0; i < cur.patterns.size(); ++i) {
        Pattern restricted;
        restricted.reserve(slots.size());
        for (auto s : slots) restricted.push_back(cur.patterns[i][s]);
        const auto it = index_of.find(restricted);
        if (it == index_of.end()) {
          laminar_ = false;  // restriction of a valid pattern should exist
          return;
        }
        cur.parent[i] = it->second;
        prev.children[it->second].push_back(static_cast<std::uint32_t>(i));
      }
    }
  }

  const SymbolicSystem* sys_;
  const Potential* phi_;
  EpsilonLevel eps_;
  DepthRange depth_;
  UniverseBudget budget_;
  std::vector<Layer> layers_;
  bool laminar_ = false;
};

struct CertEntry {
  int depth_n = 1;
  std::size_t layer = 0;
  std::size_t index = 0;
  double weight = 0;
  double coefficient = 1.0;  // fractional covers only
};

struct ValueResult {
  double value = 0;
  BoundSide bound_side = BoundSide::TwoSided;
  bool budget_exceeded = false;
  std::vector<CertEntry> certificate;
};

namespace detail {

// ----- generic (non-nested) path: atoms + exact search -------------------

struct AtomInstance {
  std::vector<std::vector<std::uint64_t>> covers;  // per ball, atom bitset
  std::vector<double> weights;
  std::vector<char> meets_h;
  std::vector<Rational> mass;  // katok only
  std::size_t num_atoms = 0;
  std::vector<std::pair<std::size_t, std::size_t>> ids;  // (layer, index)
};

inline AtomInstance build_atoms(const BallUniverse& u, const TargetSet& h,
                                const GaugeSpec& g, double s) {
  const auto& layers = u.layers();
  std::vector<GroupElement> all;
  for (const auto& layer : layers)
    all.insert(all.end(), layer.support->begin(), layer.support->end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  const auto patterns = u.system().enumerate_patterns(all, u.budget().atom_cap);
  auto support = std::make_shared<const std::vector<GroupElement>>(all);

  std::vector<std::size_t> atoms;  // indices of patterns meeting H
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const Cylinder atom{support, patterns[i]};
    if (h.meets(u.system(), atom)) atoms.push_back(i);
  }

  AtomInstance inst;
  inst.num_atoms = atoms.size();
  const std::size_t words = (atoms.size() + 63) / 64;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    // Slots of this layer's window inside the joint support.
    std::vector<std::size_t> slots;
    for (const auto& gpt : *layers[li].support) {
      const auto it = std::lower_bound(all.begin(), all.end(), gpt);
      slots.push_back(static_cast<std::size_t>(it - all.begin()));
    }
    for (std::size_t bi = 0; bi < layers[li].patterns.size(); ++bi) {
      std::vector<std::uint64_t> bits(words, 0);
      for (std::size_t ai = 0; ai < atoms.size(); ++ai) {
        const auto& atom_pat = patterns[atoms[ai]];
        bool inside = true;
        for (std::size_t k = 0; k < slots.size() && inside; ++k)
          inside = atom_pat[slots[k]] == layers[li].patterns[bi][k];
        if (inside) bits[ai / 64] |= (1ULL << (ai % 64));
      }
      inst.covers.push_back(std::move(bits));
      inst.weights.push_back(u.weight(g, s, li, bi));
      inst.meets_h.push_back(layers[li].meets_h[bi]);
      inst.ids.emplace_back(li, bi);
    }
  }
  return inst;
}

// Exact min-weight set cover by branch and bound: branch on the lowest
// uncovered atom over the balls covering it, in canonical ball order.
struct CoverSearch {
  const AtomInstance& inst;
  std::size_t node_cap;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_sel, cur_sel;
  std::vector<double> atom_min_weight;  // admissible completion bound
  bool budget_hit = false;
  std::size_t nodes = 0;

  explicit CoverSearch(const AtomInstance& in, std::size_t cap) : inst(in), node_cap(cap) {
    atom_min_weight.assign(inst.num_atoms, std::numeric_limits<double>::infinity());
    for (std::size_t b = 0; b < inst.weights.size(); ++b)
      for (std::size_t a = 0; a < inst.num_atoms; ++a)
        if (inst.covers[b][a / 64] & (1ULL << (a % 64)))
          atom_min_weight[a] = std::min(atom_min_weight[a], inst.weights[b]);
  }

  void run() {
    std::vector<std::uint64_t> covered((inst.num_atoms + 63) / 64, 0);
    dfs(covered, 0.0);
  }

  void dfs(std::vector<std::uint64_t>& covered, double cost) {
    if (++nodes > node_cap) {
      budget_hit = true;
      return;
    }
    std::optional<std::size_t> open;
    double bound = cost;
    for (std::size_t a = 0; a < inst.num_atoms; ++a) {
      if (!(covered[a / 64] & (1ULL << (a % 64)))) {
        if (!open) open = a;
        bound = std::max(bound, cost + atom_min_weight[a]);
      }
    }
    if (!open) {
      if (cost < best) {
        best = cost;
        best_sel = cur_sel;
      }
      return;
    }
    if (bound >= best) return;
    const std::size_t a = *open;
    for (std::size_t b = 0; b < inst.weights.size(); ++b) {
      if (!(inst.covers[b][a / 64] & (1ULL << (a % 64)))) continue;
      if (cost + inst.weights[b] >= best) continue;
      std::vector<std::uint64_t> next = covered;
      for (std::size_t w = 0; w < next.size(); ++w) next[w] |= inst.covers[b][w];
      cur_sel.push_back(b);
      dfs(next, cost + inst.weights[b]);
      cur_sel.pop_back();
      if (budget_hit) return;
    }
  }
};

// Exact max-weight disjoint family (centers meeting H): branch and bound
// with the greedy residual bound, canonical order (depth, lex).
struct PackingSearch {
  const AtomInstance& inst;
  std::vector<std::size_t> candidates;
  std::vector<std::vector<char>> conflict;
  std::size_t node_cap;
  double best = -1;
  std::vector<std::size_t> best_sel, cur_sel;
  bool budget_hit = false;
  std::size_t nodes = 0;

  PackingSearch(const AtomInstance& in, std::size_t cap) : inst(in), node_cap(cap) {
    for (std::size_t b = 0; b < inst.weights.size(); ++b)
      if (inst.meets_h[b]) candidates.push_back(b);
    conflict.assign(candidates.size(), std::vector<char>(candidates.size(), 0));
    for (std::size_t i = 0; i < candidates.size(); ++i)
      for (std::size_t j = i + 1; j < candidates.size(); ++j) {
        // Two cylinders intersect iff some atom lies under both; the atom
        // partition refines every ball, so bitset intersection decides it.
        bool overlap = false;
        const auto& bi = inst.covers[candidates[i]];
        const auto& bj = inst.covers[candidates[j]];
        for (std::size_t w = 0; w < bi.size() && !overlap; ++w)
          overlap = (bi[w] & bj[w]) != 0;
        conflict[i][j] = conflict[j][i] = overlap ? 1 : 0;
      }
  }

  void run() {
    std::vector<char> alive(candidates.size(), 1);
    dfs(alive, 0, 0.0);
  }

  void dfs(std::vector<char>& alive, std::size_t from, double value) {
    if (++nodes > node_cap) {
      budget_hit = true;
      return;
    }
    if (value > best) {
      best = value;
      best_sel = cur_sel;
    }
    double bound = value;  // greedy residual bound
    for (std::size_t i = from; i < candidates.size(); ++i)
      if (alive[i]) bound += inst.weights[candidates[i]];
    if (bound <= best) return;
    for (std::size_t i = from; i < candidates.size(); ++i) {
      if (!alive[i]) continue;
      std::vector<char> next = alive;
      for (std::size_t j = i + 1; j < candidates.size(); ++j)
        if (conflict[i][j]) next[j] = 0;
      cur_sel.push_back(candidates[i]);
      dfs(next, i + 1, value + inst.weights[candidates[i]]);
      cur_sel.pop_back();
      if (budget_hit) return;
      alive[i] = 0;  // families excluding ball i are explored after this point
    }
  }
};

}  // namespace detail

// ----- laminar tree DP ------------------------------------------------------

namespace detail {

struct LaminarPlan {
  double value = 0;
  std::vector<std::pair<std::size_t, std::size_t>> picks;  // (layer, index)
};

// minimize = true: min-weight cover of the H-atoms (choice: this ball or the
// best covers of the children). minimize = false: max-weight disjoint family
// with centers meeting H (choice: this ball or the best packings below).
inline LaminarPlan laminar_optimize(const BallUniverse& u, const GaugeSpec& g, double s,
                                    bool minimize) {
  const auto& layers = u.layers();
  const std::size_t last = layers.size() - 1;
  std::vector<std::vector<double>> value(layers.size());
  std::vector<std::vector<char>> take(layers.size());
  for (std::size_t li = layers.size(); li-- > 0;) {
    const auto& layer = layers[li];
    value[li].assign(layer.patterns.size(), 0.0);
    take[li].assign(layer.patterns.size(), 0);
    for (std::size_t i = 0; i < layer.patterns.size(); ++i) {
      if (!layer.meets_h[i]) continue;  // outside H: nothing to cover, unusable center
      const double own = u.weight(g, s, li, i);
      if (li == last) {
        value[li][i] = own;
        take[li][i] = 1;
        continue;
      }
      double from_children = 0;
      for (auto c : layer.children[i]) from_children += value[li + 1][c];
      if (minimize) {
        take[li][i] = own <= from_children ? 1 : 0;  // ties: shallower ball
        value[li][i] = std::min(own, from_children);
      } else {
        take[li][i] = own >= from_children ? 1 : 0;
        value[li][i] = std::max(own, from_children);
      }
    }
  }
  LaminarPlan plan;
  // Walk down from the roots collecting the chosen balls.
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t i = 0; i < layers[0].patterns.size(); ++i)
    if (layers[0].meets_h[i]) stack.emplace_back(0, i);
  std::reverse(stack.begin(), stack.end());
  while (!stack.empty()) {
    const auto [li, i] = stack.back();
    stack.pop_back();
    if (take[li][i]) {
      plan.picks.emplace_back(li, i);
      plan.value += u.weight(g, s, li, i);
    } else {
      const auto& kids = layers[li].children[i];
      for (auto it = kids.rbegin(); it != kids.rend(); ++it)
        if (layers[li + 1].meets_h[*it]) stack.emplace_back(li + 1, *it);
    }
  }
  std::sort(plan.picks.begin(), plan.picks.end());
  return plan;
}

inline ValueResult plan_to_result(const BallUniverse& u, const GaugeSpec& g, double s,
                                  const detail::LaminarPlan& plan, BoundSide side) {
  ValueResult r;
  r.value = plan.value;
  r.bound_side = side;
  for (const auto& [li, i] : plan.picks)
    r.certificate.push_back(
        {u.layers()[li].n, li, i, u.weight(g, s, li, i), 1.0});
  return r;
}

}  // namespace detail

// M^s_{N,eps}(H): exact minimum over ball covers of H with n_i in [N, N_max].
// Truncation at N_max can only raise the paper's infimum, hence UpperBound.
inline ValueResult cover_value(const BallUniverse& u, const TargetSet& h, const GaugeSpec& g,
                               double s) {
  if (u.laminar()) {
    const auto plan = detail::laminar_optimize(u, g, s, /*minimize=*/true);
    return detail::plan_to_result(u, g, s, plan, BoundSide::UpperBound);
  }
  const auto inst = detail::build_atoms(u, h, g, s);
  detail::CoverSearch search(inst, u.budget().search_node_cap);
  search.run();
  ValueResult r;
  r.value = search.best;
  r.bound_side = search.budget_hit ? BoundSide::Heuristic : BoundSide::UpperBound;
  r.budget_exceeded = search.budget_hit;
  for (auto b : search.best_sel) {
    const auto [li, i] = inst.ids[b];
    r.certificate.push_back({u.layers()[li].n, li, i, inst.weights[b], 1.0});
  }
  std::sort(r.certificate.begin(), r.certificate.end(),
            [](const CertEntry& a, const CertEntry& b) {
              return std::tie(a.layer, a.index) < std::tie(b.layer, b.index);
            });
  return r;
}

// L^s_{N,eps}(H): exact maximum over disjoint families with centers meeting H.
// Truncation can only lower the paper's supremum, hence LowerBound.
inline ValueResult packing_value(const BallUniverse& u, const TargetSet& h, const GaugeSpec& g,
                                 double s) {
  if (u.laminar()) {
    const auto plan = detail::laminar_optimize(u, g, s, /*minimize=*/false);
    return detail::plan_to_result(u, g, s, plan, BoundSide::LowerBound);
  }
  const auto inst = detail::build_atoms(u, h, g, s);
  detail::PackingSearch search(inst, u.system(), u.budget().search_node_cap);
  search.run();
  ValueResult r;
  r.value = std::max(0.0, search.best);
  r.bound_side = search.budget_hit ? BoundSide::Heuristic : BoundSide::LowerBound;
  r.budget_exceeded = search.budget_hit;
  for (auto b : search.best_sel) {
    const auto [li, i] = inst.ids[b];
    r.certificate.push_back({u.layers()[li].n, li, i, inst.weights[b], 1.0});
  }
  std::sort(r.certificate.begin(), r.certificate.end(),
            [](const CertEntry& a, const CertEntry& b) {
              return std::tie(a.layer, a.index) < std::tie(b.layer, b.index);
            });
  return r;
}

}  // namespace cpdim

#include "cpdim/detail/cp_core_lp.hpp"
#include "cpdim/detail/cp_core_outer.hpp"
