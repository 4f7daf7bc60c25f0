#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cpdim/detail/util.hpp"
#include "cpdim/potential.hpp"
#include "cpdim/rational.hpp"
#include "cpdim/symbolic.hpp"

namespace cpdim {

// Bernoulli or 1-D stationary Markov measure with exact rational parameters.
class MeasureSpec {
 public:
  enum class Kind { Bernoulli, Markov };

  static MeasureSpec bernoulli(std::vector<Rational> probs) {
    if (probs.size() < 2) throw std::invalid_argument("bernoulli: need >= 2 symbols");
    Rational sum = 0;
    for (const auto& p : probs) {
      if (p < 0) throw std::invalid_argument("bernoulli: negative probability");
      sum += p;
    }
    if (sum != 1) throw std::invalid_argument("bernoulli: probabilities must sum to 1");
    MeasureSpec m;
    m.kind_ = Kind::Bernoulli;
    m.probs_ = std::move(probs);
    return m;
  }

  // Snap a double to an exact rational grid (denominator 10^9); the last
  // letter absorbs the remainder so the vector sums to 1 exactly.
  static MeasureSpec bernoulli_from_doubles(const std::vector<double>& probs) {
    std::vector<Rational> q;
    Rational rest = 1;
    const BigInt den = 1000000000;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      const auto num = static_cast<std::int64_t>(std::llround(probs[i] * 1e9));
      Rational r(BigInt(num), den);
      q.push_back(r);
      rest -= r;
    }
    q.push_back(rest);
    return bernoulli(std::move(q));
  }

  static MeasureSpec markov(std::vector<std::vector<Rational>> transition,
                            std::vector<Rational> stationary) {
    const std::size_t k = transition.size();
    if (k < 2 || stationary.size() != k)
      throw std::invalid_argument("markov: inconsistent sizes");
    Rational pisum = 0;
    for (const auto& p : stationary) {
      if (p < 0) throw std::invalid_argument("markov: negative stationary mass");
      pisum += p;
    }
    if (pisum != 1) throw std::invalid_argument("markov: stationary vector must sum to 1");
    for (const auto& row : transition) {
      if (row.size() != k) throw std::invalid_argument("markov: non-square matrix");
      Rational rs = 0;
      for (const auto& p : row) {
        if (p < 0) throw std::invalid_argument("markov: negative entry");
        rs += p;
      }
      if (rs != 1) throw std::invalid_argument("markov: rows must sum to 1");
    }
    for (std::size_t b = 0; b < k; ++b) {
      Rational acc = 0;
      for (std::size_t a = 0; a < k; ++a) acc += stationary[a] * transition[a][b];
      if (acc != stationary[b])
        throw std::invalid_argument("markov: stationary vector must satisfy pi P = pi");
    }
    MeasureSpec m;
    m.kind_ = Kind::Markov;
    m.transition_ = std::move(transition);
    m.probs_ = std::move(stationary);
    return m;
  }

  Kind kind() const { return kind_; }
  std::size_t alphabet() const { return probs_.size(); }
  const std::vector<Rational>& marginal() const { return probs_; }
  const std::vector<std::vector<Rational>>& transition() const { return transition_; }

  // Markov support must sit inside the system's allowed transitions.
  void validate_for(const SymbolicSystem& sys) const {
    if (alphabet() != static_cast<std::size_t>(sys.alphabet()))
      throw std::invalid_argument("measure: alphabet size mismatch");
    if (kind_ != Kind::Markov) return;
    if (sys.dimension() != 1)
      throw std::invalid_argument("markov: requires a 1-D system");
    const std::vector<GroupElement> pair{GroupElement{0}, GroupElement{1}};
    for (Symbol a = 0; a < alphabet(); ++a)
      for (Symbol b = 0; b < alphabet(); ++b)
        if (transition_[a][b] > 0 && !sys.extendable(pair, Pattern{a, b}))
          throw std::invalid_argument("markov: support uses a forbidden transition");
  }

 private:
  Kind kind_ = Kind::Bernoulli;
  std::vector<Rational> probs_;                    // Bernoulli probs / stationary
  std::vector<std::vector<Rational>> transition_;  // Markov only
};

namespace detail {

// Gap completion for Markov masses on non-contiguous supports.
inline std::vector<std::vector<Rational>> matrix_power(
    const std::vector<std::vector<Rational>>& p, std::uint32_t e) {
  const std::size_t k = p.size();
  std::vector<std::vector<Rational>> acc(k, std::vector<Rational>(k, 0));
  for (std::size_t i = 0; i < k; ++i) acc[i][i] = 1;
  auto mul = [&](const auto& a, const auto& b) {
    std::vector<std::vector<Rational>> c(k, std::vector<Rational>(k, 0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t l = 0; l < k; ++l) {
        if (a[i][l] == 0) continue;
        for (std::size_t j = 0; j < k; ++j) c[i][j] += a[i][l] * b[l][j];
      }
    return c;
  };
  auto base = p;
  while (e != 0) {
    if (e & 1) acc = mul(acc, base);
    base = mul(base, base);
    e >>= 1;
  }
  return acc;
}

}  // namespace detail

// Exact mu-mass of a cylinder.
inline Rational cylinder_mass(const MeasureSpec& mu, const Cylinder& c) {
  const auto& pts = c.support_points();
  if (pts.empty()) return 1;
  if (mu.kind() == MeasureSpec::Kind::Bernoulli) {
    Rational acc = 1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (c.symbols[i] >= mu.alphabet())
        throw std::invalid_argument("cylinder_mass: symbol out of range");
      acc *= mu.marginal()[c.symbols[i]];
    }
    return acc;
  }
  for (const auto& g : pts)
    if (g.coords[1] != 0 || g.coords[2] != 0)
      throw std::invalid_argument("cylinder_mass: Markov measures are 1-D");
  Rational acc = mu.marginal()[c.symbols[0]];
  std::map<std::uint32_t, std::vector<std::vector<Rational>>> powers;
  for (std::size_t i = 1; i < pts.size() && acc != 0; ++i) {
    const auto gap = static_cast<std::uint32_t>(pts[i].coords[0] - pts[i - 1].coords[0]);
    if (gap == 1) {
      acc *= mu.transition()[c.symbols[i - 1]][c.symbols[i]];
    } else {
      auto it = powers.find(gap);
      if (it == powers.end())
        it = powers.emplace(gap, detail::matrix_power(mu.transition(), gap)).first;
      acc *= it->second[c.symbols[i - 1]][c.symbols[i]];
    }
  }
  return acc;
}

namespace detail {

// Exact inverse-CDF thresholds on the 64-bit hash scale.
inline std::vector<std::uint64_t> cdf_thresholds(const std::vector<Rational>& probs) {
  std::vector<std::uint64_t> out;
  Rational cum = 0;
  const BigInt scale = BigInt(1) << 64;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    cum += probs[i];
    BigInt t = boost::multiprecision::numerator(cum) * scale /
               boost::multiprecision::denominator(cum);
    out.push_back(t.convert_to<std::uint64_t>());
  }
  return out;
}

inline Symbol pick(const std::vector<std::uint64_t>& thresholds, std::uint64_t draw) {
  Symbol s = 0;
  while (s < thresholds.size() && draw >= thresholds[s]) ++s;
  return s;
}

// Stationary chain sample materialized outward from the origin; reads are
// order independent because materialization is always contiguous from 0.
struct MarkovChainSampler {
  std::vector<std::uint64_t> init;
  std::vector<std::vector<std::uint64_t>> forward;
  std::vector<std::vector<std::uint64_t>> backward;
  std::uint64_t seed;
  std::mutex mu;
  std::map<std::int32_t, Symbol> cache;

  Symbol at(std::int32_t pos) {
    std::lock_guard<std::mutex> lock(mu);
    auto draw = [&](std::int32_t p) {
      return mix64(hash_combine(seed, static_cast<std::uint64_t>(
                                          static_cast<std::int64_t>(p) + (1LL << 40))));
    };
    if (cache.empty()) cache[0] = pick(init, draw(0));
    while (cache.rbegin()->first < pos) {
      const auto [last_pos, last_sym] = *cache.rbegin();
      cache[last_pos + 1] = pick(forward[last_sym], draw(last_pos + 1));
    }
    while (cache.begin()->first > pos) {
      const auto [first_pos, first_sym] = *cache.begin();
      cache[first_pos - 1] = pick(backward[first_sym], draw(first_pos - 1));
    }
    return cache[pos];
  }
};

}  // namespace detail

// mu-typical point with deterministic per-seed content.
inline Configuration sample_point(const MeasureSpec& mu, const SymbolicSystem& sys,
                                  std::uint64_t seed) {
  mu.validate_for(sys);
  if (mu.kind() == MeasureSpec::Kind::Bernoulli) {
    auto thresholds =
        std::make_shared<const std::vector<std::uint64_t>>(detail::cdf_thresholds(mu.marginal()));
    return Configuration::lazy(
        sys,
        [thresholds, seed](const GroupElement& g) {
          std::uint64_t h = seed;
          for (int i = 0; i < kMaxDimension; ++i)
            h = detail::hash_combine(
                h, static_cast<std::uint64_t>(static_cast<std::int64_t>(g.coords[i]) + (1LL << 40)));
          return detail::pick(*thresholds, detail::mix64(h));
        },
        seed);
  }
  const auto k = mu.alphabet();
  auto chain = std::make_shared<detail::MarkovChainSampler>();
  chain->seed = seed;
  chain->init = detail::cdf_thresholds(mu.marginal());
  for (std::size_t a = 0; a < k; ++a)
    chain->forward.push_back(detail::cdf_thresholds(mu.transition()[a]));
  // Backward kernel B(b, a) = pi(a) P(a, b) / pi(b); rows sum to 1 exactly.
  for (std::size_t b = 0; b < k; ++b) {
    std::vector<Rational> row(k, 0);
    if (mu.marginal()[b] != 0)
      for (std::size_t a = 0; a < k; ++a)
        row[a] = mu.marginal()[a] * mu.transition()[a][b] / mu.marginal()[b];
    else
      row[b] = 1;
    chain->backward.push_back(detail::cdf_thresholds(row));
  }
  return Configuration::lazy(
      sys, [chain](const GroupElement& g) { return chain->at(g.coords[0]); }, seed);
}

// Override coordinates pinned by a cylinder; used to sample points of a
// clopen target set.
inline Configuration sample_point_in(const MeasureSpec& mu, const SymbolicSystem& sys,
                                     const Cylinder& piece, std::uint64_t seed) {
  const Configuration base = sample_point(mu, sys, seed);
  auto pinned = std::make_shared<const Cylinder>(piece);
  return Configuration::lazy(
      sys,
      [base, pinned](const GroupElement& g) {
        if (const auto s = pinned->symbol_at(g)) return *s;
        return base.at(g);
      },
      seed);
}

struct LocalExponentTrace {
  std::string point_id;
  int eps_level = 0;
  int n_lo = 1, n_hi = 1;
  std::vector<double> e;  // e[n - n_lo]
  double tail_inf = 0, tail_sup = 0;
};

// e_n = -log mu(B_{F_n}(x, eps)) / Phi_{F_n}(x); throws when a ball along the
// trace is mu-null (x atypical for mu or support mismatch).
inline LocalExponentTrace local_exponent_trace(const MeasureSpec& mu,
                                               const SymbolicSystem& sys,
                                               const Configuration& x, const Potential& phi,
                                               const FolnerSequence& folner, EpsilonLevel eps,
                                               int n_lo, int n_hi, int tail_window = 4) {
  if (n_lo < 1 || n_hi < n_lo) throw std::invalid_argument("local_exponent_trace: bad range");
  LocalExponentTrace tr;
  tr.eps_level = eps.m;
  tr.n_lo = n_lo;
  tr.n_hi = n_hi;
  for (int n = n_lo; n <= n_hi; ++n) {
    const FiniteSubset f = folner.member(n);
    const Cylinder ball = ball_of(x, f, eps);
    const Rational mass = cylinder_mass(mu, ball);
    if (mass == 0)
      throw std::runtime_error("local_exponent_trace: mu-null ball at n = " + std::to_string(n));
    const Rational phi_sum = phi.birkhoff_sum_exact(x, f);
    tr.e.push_back(-log_rational(mass) / to_double(phi_sum));
  }
  const int lo = std::max(0, static_cast<int>(tr.e.size()) - tail_window);
  tr.tail_inf = tr.e[static_cast<std::size_t>(lo)];
  tr.tail_sup = tr.e[static_cast<std::size_t>(lo)];
  for (std::size_t i = static_cast<std::size_t>(lo); i < tr.e.size(); ++i) {
    tr.tail_inf = std::min(tr.tail_inf, tr.e[i]);
    tr.tail_sup = std::max(tr.tail_sup, tr.e[i]);
  }
  return tr;
}

enum class TraceSide { Lower, Upper };

struct MeasureDimensionEstimate {
  double estimate = 0;
  double half_width_95 = 0;       // normal-approximation interval (MC mode)
  int num_points = 0;             // samples (MC) or patterns (exact)
  bool exact = false;
  std::vector<double> per_point;  // MC per-sample tail values
};

struct McSampling {
  int num_points = 32;
  std::uint64_t seed = 1;
  int n_lo = 4, n_hi = 12, tail_window = 4;
};

struct ExactDepth {
  int n = 8;
  std::size_t enumeration_cap = 1u << 22;
};

namespace detail {

// Exact expectation of e_n over depth-n cells for Bernoulli + window-0
// potentials: group cells by symbol counts inside and outside F_n. Counts in
// the two regions are independent, so the sum runs over composition pairs.
inline double bernoulli_count_class_expectation(const MeasureSpec& mu, const Potential& phi,
                                                std::size_t folner_cells,
                                                std::size_t window_cells, TraceSide /*side*/) {
  const auto& p = mu.marginal();
  const std::size_t k = p.size();
  std::vector<double> logp(k), phival(k);
  for (std::size_t s = 0; s < k; ++s) {
    logp[s] = p[s] == 0 ? -1e300 : log_rational(p[s]);
    phival[s] = to_double(phi.value(Pattern{static_cast<Symbol>(s)}));
  }
  const std::size_t margin = window_cells - folner_cells;
  double total = 0;

  std::vector<std::size_t> ca(k, 0), cb(k, 0);
  auto log_multinomial = [](std::size_t n, const std::vector<std::size_t>& c) {
    double v = std::lgamma(static_cast<double>(n) + 1);
    for (auto x : c) v -= std::lgamma(static_cast<double>(x) + 1);
    return v;
  };
  // Recursive enumeration of compositions of `cells` into k parts.
  std::function<void(std::vector<std::size_t>&, std::size_t, std::size_t, std::function<void()>)>
      compositions = [&](std::vector<std::size_t>& c, std::size_t idx, std::size_t left,
                         std::function<void()> emit) {
        if (idx + 1 == k) {
          c[idx] = left;
          emit();
          return;
        }
        for (std::size_t v = 0; v <= left; ++v) {
          c[idx] = v;
          compositions(c, idx + 1, left - v, emit);
        }
      };
  compositions(ca, 0, folner_cells, [&] {
    double la = log_multinomial(folner_cells, ca);
    double phi_sum = 0, log_mass_a = 0;
    for (std::size_t s = 0; s < k; ++s) {
      phi_sum += static_cast<double>(ca[s]) * phival[s];
      log_mass_a += static_cast<double>(ca[s]) * logp[s];
    }
    compositions(cb, 0, margin, [&] {
      double lb = log_multinomial(margin, cb);
      double log_mass = log_mass_a;
      for (std::size_t s = 0; s < k; ++s) log_mass += static_cast<double>(cb[s]) * logp[s];
      if (log_mass < -1e250) return;  // zero-probability class
      const double weight = std::exp(la + lb + log_mass);
      total += weight * (-log_mass / phi_sum);
    });
  });
  return total;
}

}  // namespace detail

// Lower/upper measure-theoretic BS dimension at fixed eps: Monte Carlo mean
// of tail inf/sup of e_n over mu-typical points, or the exact expectation of
// e_n over all depth-n cells.
inline MeasureDimensionEstimate measure_bs_dimension(
    const MeasureSpec& mu, const SymbolicSystem& sys, const Potential& phi,
    const FolnerSequence& folner, EpsilonLevel eps, TraceSide side,
    const std::variant<McSampling, ExactDepth>& mode) {
  mu.validate_for(sys);
  MeasureDimensionEstimate out;
  if (std::holds_alternative<ExactDepth>(mode)) {
    const auto& ed = std::get<ExactDepth>(mode);
    if (phi.window_radius() > eps.m)
      throw std::invalid_argument(
          "measure_bs_dimension: ExactDepth requires potential radius <= eps level");
    out.exact = true;
    const FiniteSubset f = folner.member(ed.n);
    const FiniteSubset window = bowen_window(f, eps);
    if (mu.kind() == MeasureSpec::Kind::Bernoulli && phi.window_radius() == 0 &&
        folner.is_box_rule()) {
      out.estimate = detail::bernoulli_count_class_expectation(mu, phi, f.size(),
                                                               window.size(), side);
      out.num_points = -1;  // count-class path
      return out;
    }
    auto support = make_support(window);
    const auto patterns = sys.enumerate_patterns(*support, ed.enumeration_cap);
    double total = 0;
    for (const auto& pat : patterns) {
      const Cylinder ball{support, pat};
      const Rational mass = cylinder_mass(mu, ball);
      if (mass == 0) continue;
      // r <= m: Phi_F is pinned by the ball.
      const Rational phi_sum = phi.ball_extremum_exact(sys, ball, f, true);
      total += to_double(mass) * (-log_rational(mass) / to_double(phi_sum));
    }
    out.estimate = total;
    out.num_points = static_cast<int>(patterns.size());
    return out;
  }

  const auto& mc = std::get<McSampling>(mode);
  out.num_points = mc.num_points;
  out.per_point.resize(static_cast<std::size_t>(mc.num_points));
  std::vector<std::string> errors(static_cast<std::size_t>(mc.num_points));
  detail::parallel_for(static_cast<std::size_t>(mc.num_points), [&](std::size_t i) {
    const std::uint64_t point_seed = detail::hash_combine(mc.seed, i);
    try {
      const Configuration x = sample_point(mu, sys, point_seed);
      const auto tr = local_exponent_trace(mu, sys, x, phi, folner, eps, mc.n_lo, mc.n_hi,
                                           mc.tail_window);
      out.per_point[i] = side == TraceSide::Lower ? tr.tail_inf : tr.tail_sup;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const auto& err : errors)
    if (!err.empty()) throw std::runtime_error(err);
  double mean = 0;
  for (double v : out.per_point) mean += v;
  mean /= static_cast<double>(mc.num_points);
  double var = 0;
  for (double v : out.per_point) var += (v - mean) * (v - mean);
  var = mc.num_points > 1 ? var / static_cast<double>(mc.num_points - 1) : 0.0;
  out.estimate = mean;
  out.half_width_95 = 1.96 * std::sqrt(var / static_cast<double>(mc.num_points));
  return out;
}

}  // namespace cpdim
