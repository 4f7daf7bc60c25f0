#pragma once

// Fractional (weighted) covers: the LP relaxation of cover_value. On laminar
// universes the covering matrix is totally balanced, so the LP optimum is
// integral and equals cover_value; the generic path solves the LP exactly
// with a rational two-phase simplex under Bland's rule.

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cpdim/rational.hpp"

namespace cpdim {

namespace detail {

// min c.x  s.t.  A x >= 1, x >= 0, all coefficients rational. Returns the
// optimal x. Sizes here are tiny (atoms x balls), so a dense tableau is fine.
inline std::vector<Rational> solve_covering_lp(const std::vector<std::vector<Rational>>& a,
                                               const std::vector<Rational>& c) {
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  // Standard form: A x - s + r = 1 with slacks s and artificials r.
  const std::size_t cols = n + m + m;
  std::vector<std::vector<Rational>> t(m, std::vector<Rational>(cols + 1, 0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
    t[i][n + i] = -1;
    t[i][n + m + i] = 1;
    t[i][cols] = 1;
    basis[i] = n + m + i;
  }

  auto pivot = [&](std::size_t row, std::size_t col) {
    const Rational piv = t[row][col];
    for (auto& v : t[row]) v /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row || t[i][col] == 0) continue;
      const Rational f = t[i][col];
      for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[row][j];
    }
    basis[row] = col;
  };

  auto run_phase = [&](const std::vector<Rational>& cost, std::size_t usable_cols) {
    while (true) {
      // Reduced costs z_j = cost_j - cost_B . column_j; Bland: first negative.
      std::size_t enter = usable_cols;
      for (std::size_t j = 0; j < usable_cols; ++j) {
        Rational red = cost[j];
        for (std::size_t i = 0; i < m; ++i)
          if (t[i][j] != 0) red -= cost[basis[i]] * t[i][j];
        if (red < 0) {
          enter = j;
          break;
        }
      }
      if (enter == usable_cols) return;
      std::size_t leave = m;
      Rational best_ratio = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][enter] <= 0) continue;
        const Rational ratio = t[i][cols] / t[i][enter];
        if (leave == m || ratio < best_ratio ||
            (ratio == best_ratio && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave == m) throw std::runtime_error("covering LP: unbounded");
      pivot(leave, enter);
    }
  };

  std::vector<Rational> phase1(cols, 0);
  for (std::size_t j = n + m; j < cols; ++j) phase1[j] = 1;
  run_phase(phase1, cols);
  Rational infeas = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] >= n + m) infeas += t[i][cols];
  if (infeas != 0) throw std::runtime_error("covering LP: infeasible");
  // Drive any degenerate artificials out of the basis.
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n + m) continue;
    for (std::size_t j = 0; j < n + m; ++j)
      if (t[i][j] != 0) {
        pivot(i, j);
        break;
      }
  }

  std::vector<Rational> phase2(cols, 0);
  for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
  run_phase(phase2, n + m);

  std::vector<Rational> x(n, 0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) x[basis[i]] = t[i][cols];
  return x;
}

}  // namespace detail

// W^s_{N,eps}(H): exact optimum of min sum c_i w_i with sum c_i 1_{ball_i} >= 1
// on H, c_i >= 0. Always <= cover_value; equal on laminar universes.
inline ValueResult weighted_cover_value(const BallUniverse& u, const TargetSet& h,
                                        const GaugeSpec& g, double s) {
  if (u.laminar()) {
    auto r = cover_value(u, h, g, s);
    if (r.bound_side == BoundSide::UpperBound) r.bound_side = BoundSide::UpperBound;
    return r;
  }
  const auto inst = detail::build_atoms(u, h, g, s);
  const std::size_t n = inst.weights.size();
  std::vector<std::vector<Rational>> rows(inst.num_atoms, std::vector<Rational>(n, 0));
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t a = 0; a < inst.num_atoms; ++a)
      if (inst.covers[b][a / 64] & (1ULL << (a % 64))) rows[a][b] = 1;
  std::vector<Rational> costs;
  costs.reserve(n);
  for (double w : inst.weights) costs.push_back(Rational(w));  // doubles are exact binary rationals
  const auto x = detail::solve_covering_lp(rows, costs);
  ValueResult r;
  r.bound_side = BoundSide::UpperBound;
  Rational val = 0;
  for (std::size_t b = 0; b < n; ++b) {
    if (x[b] == 0) continue;
    val += x[b] * costs[b];
    const auto [li, i] = inst.ids[b];
    r.certificate.push_back({u.layers()[li].n, li, i, inst.weights[b], to_double(x[b])});
  }
  r.value = to_double(val);
  return r;
}

}  // namespace cpdim
