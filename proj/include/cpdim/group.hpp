#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpdim/rational.hpp"

namespace cpdim {

constexpr int kMaxDimension = 3;

// Point of Z^d, d <= 3; unused coordinates stay 0 so comparisons are uniform.
struct GroupElement {
  std::array<std::int32_t, kMaxDimension> coords{0, 0, 0};

  GroupElement() = default;
  explicit GroupElement(std::int32_t x) : coords{x, 0, 0} {}
  GroupElement(std::int32_t x, std::int32_t y) : coords{x, y, 0} {}
  GroupElement(std::int32_t x, std::int32_t y, std::int32_t z) : coords{x, y, z} {}

  friend GroupElement operator+(const GroupElement& a, const GroupElement& b) {
    GroupElement r;
    for (int i = 0; i < kMaxDimension; ++i) r.coords[i] = a.coords[i] + b.coords[i];
    return r;
  }
  friend GroupElement operator-(const GroupElement& a, const GroupElement& b) {
    GroupElement r;
    for (int i = 0; i < kMaxDimension; ++i) r.coords[i] = a.coords[i] - b.coords[i];
    return r;
  }
  GroupElement operator-() const { return GroupElement{} - *this; }

  // Word length: max-norm, so metric level sets are boxes.
  std::int32_t norm() const {
    std::int32_t m = 0;
    for (int i = 0; i < kMaxDimension; ++i) m = std::max(m, std::abs(coords[i]));
    return m;
  }

  auto operator<=>(const GroupElement&) const = default;
};

// Finite subset of Z^d in canonical form: sorted lexicographically, deduped.
class FiniteSubset {
 public:
  FiniteSubset() = default;
  FiniteSubset(int dimension, std::vector<GroupElement> elements)
      : dimension_(dimension), elements_(std::move(elements)) {
    if (dimension_ < 1 || dimension_ > kMaxDimension)
      throw std::invalid_argument("FiniteSubset: dimension out of range");
    for (const auto& g : elements_)
      for (int i = dimension_; i < kMaxDimension; ++i)
        if (g.coords[i] != 0)
          throw std::invalid_argument("FiniteSubset: element outside dimension");
    std::sort(elements_.begin(), elements_.end());
    elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
  }

  int dimension() const { return dimension_; }
  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }
  const std::vector<GroupElement>& elements() const { return elements_; }

  bool contains(const GroupElement& g) const {
    return std::binary_search(elements_.begin(), elements_.end(), g);
  }

  FiniteSubset translated(const GroupElement& g) const {
    std::vector<GroupElement> out;
    out.reserve(elements_.size());
    for (const auto& e : elements_) out.push_back(e + g);
    return FiniteSubset(dimension_, std::move(out));
  }

  // Minkowski sum F + S.
  FiniteSubset sum(const FiniteSubset& other) const {
    if (other.dimension_ != dimension_)
      throw std::invalid_argument("FiniteSubset::sum: dimension mismatch");
    std::vector<GroupElement> out;
    out.reserve(elements_.size() * other.elements_.size());
    for (const auto& a : elements_)
      for (const auto& b : other.elements_) out.push_back(a + b);
    return FiniteSubset(dimension_, std::move(out));
  }

  bool operator==(const FiniteSubset& o) const {
    return dimension_ == o.dimension_ && elements_ == o.elements_;
  }

 private:
  int dimension_ = 1;
  std::vector<GroupElement> elements_;
};

// Box [0,n)^d, the canonical Folner member for Z^d.
inline FiniteSubset box_folner(int dimension, int n) {
  if (dimension < 1 || dimension > kMaxDimension)
    throw std::invalid_argument("box_folner: dimension out of range");
  if (n < 1) throw std::invalid_argument("box_folner: n must be >= 1");
  std::vector<GroupElement> pts;
  pts.reserve(static_cast<std::size_t>(std::pow(n, dimension)));
  const int ny = dimension >= 2 ? n : 1;
  const int nz = dimension >= 3 ? n : 1;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < ny; ++y)
      for (int z = 0; z < nz; ++z) pts.emplace_back(x, y, z);
  return FiniteSubset(dimension, std::move(pts));
}

// Ball {g : |g| <= radius} in the max-norm, i.e. the box [-radius, radius]^d.
inline FiniteSubset word_ball(int dimension, int radius) {
  if (radius < 0) throw std::invalid_argument("word_ball: negative radius");
  std::vector<GroupElement> pts;
  const int ylo = dimension >= 2 ? -radius : 0, yhi = dimension >= 2 ? radius : 0;
  const int zlo = dimension >= 3 ? -radius : 0, zhi = dimension >= 3 ? radius : 0;
  for (int x = -radius; x <= radius; ++x)
    for (int y = ylo; y <= yhi; ++y)
      for (int z = zlo; z <= zhi; ++z) pts.emplace_back(x, y, z);
  return FiniteSubset(dimension, std::move(pts));
}

// |F symdiff (g+F)| / |F|, exact.
inline Rational folner_defect(const FiniteSubset& f, const GroupElement& g) {
  if (f.empty()) throw std::invalid_argument("folner_defect: empty set");
  const FiniteSubset shifted = f.translated(g);
  std::size_t common = 0;
  for (const auto& e : shifted.elements())
    if (f.contains(e)) ++common;
  const std::size_t sym = 2 * (f.size() - common);
  return Rational(BigInt(sym), BigInt(f.size()));
}

struct FolnerSequence {
  int dimension = 1;
  // Empty rule list means the box rule F_n = [0,n)^d.
  std::vector<FiniteSubset> explicit_sets;

  static FolnerSequence boxes(int dimension) { return FolnerSequence{dimension, {}}; }
  static FolnerSequence explicit_list(int dimension, std::vector<FiniteSubset> sets) {
    if (sets.empty()) throw std::invalid_argument("FolnerSequence: empty explicit list");
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (sets[i].empty()) throw std::invalid_argument("FolnerSequence: empty member");
      if (sets[i].dimension() != dimension)
        throw std::invalid_argument("FolnerSequence: dimension mismatch");
      if (i > 0 && sets[i].size() < sets[i - 1].size())
        throw std::invalid_argument("FolnerSequence: |F_n| must be non-decreasing");
    }
    return FolnerSequence{dimension, std::move(sets)};
  }

  bool is_box_rule() const { return explicit_sets.empty(); }

  FiniteSubset member(int n) const {
    if (n < 1) throw std::invalid_argument("FolnerSequence: index must be >= 1");
    if (is_box_rule()) return box_folner(dimension, n);
    if (static_cast<std::size_t>(n) > explicit_sets.size())
      throw std::invalid_argument("FolnerSequence: index beyond explicit list");
    return explicit_sets[static_cast<std::size_t>(n) - 1];
  }

  int max_index() const {
    return is_box_rule() ? std::numeric_limits<int>::max()
                         : static_cast<int>(explicit_sets.size());
  }
};

struct GrowthReport {
  std::vector<double> ratios;  // |F_n|/log n for n = 2..n_max
  bool passes = false;         // ratios non-decreasing on the tail; a finite
                               // witness consistent with divergence, not a proof
};

inline GrowthReport growth_check(const FolnerSequence& seq, int n_max) {
  if (n_max < 3) throw std::invalid_argument("growth_check: n_max must be >= 3");
  GrowthReport rep;
  const int hi = std::min(n_max, seq.max_index());
  for (int n = 2; n <= hi; ++n)
    rep.ratios.push_back(static_cast<double>(seq.member(n).size()) / std::log(n));
  if (rep.ratios.size() < 2) return rep;
  // Tail = second half, at least the last two entries.
  const std::size_t tail_len = std::max<std::size_t>(2, rep.ratios.size() / 2);
  const std::size_t start = rep.ratios.size() - tail_len;
  rep.passes = true;
  for (std::size_t i = start + 1; i < rep.ratios.size(); ++i)
    if (rep.ratios[i] < rep.ratios[i - 1]) rep.passes = false;
  return rep;
}

}  // namespace cpdim
