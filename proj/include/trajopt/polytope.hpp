#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "trajopt/core.hpp"
#include "trajopt/error.hpp"
#include "trajopt/majorization.hpp"
#include "trajopt/simplex.hpp"

namespace trajopt {

inline constexpr std::size_t kDefaultMaxEnumDim = 9;

/// Distinct permutations of a spectrum, in lexicographic order of their
/// value-level pattern.
struct VertexSet {
  std::vector<PopulationVector> vertices;

  std::size_t count() const { return vertices.size(); }
};

/// A transposition of two adjacent-valued entries: p[k] < p[l] with no entry
/// strictly between them.
struct AvSwap {
  std::size_t k = 0;
  std::size_t l = 0;

  friend bool operator==(const AvSwap&, const AvSwap&) = default;
};

/// Sizes of the groups of entries equal within eps (chained clustering).
inline std::vector<std::size_t> degeneracy_class_sizes(std::span<const double> values,
                                                       double eps) {
  const auto level = cluster_levels(values, eps);
  const std::size_t levels =
      level.empty() ? 0 : *std::max_element(level.begin(), level.end()) + 1;
  std::vector<std::size_t> sizes(levels, 0);
  for (auto l : level) ++sizes[l];
  return sizes;
}

/// n! / prod(s_i!) for class sizes s_i summing to n. Exact for n <= 20.
inline std::uint64_t multinomial_count(std::span<const std::size_t> class_sizes) {
  std::uint64_t result = 1;
  std::uint64_t placed = 0;
  for (std::size_t s : class_sizes) {
    // Multiply by C(placed + s, s) incrementally; each partial product is an
    // integer binomial, so the division is exact.
    for (std::size_t j = 1; j <= s; ++j) {
      ++placed;
      result = result * placed / j;
    }
  }
  return result;
}

inline VertexSet enumerate_vertices(std::span<const double> lambda, double eps,
                                    std::size_t max_dim = kDefaultMaxEnumDim) {
  const std::size_t d = lambda.size();
  if (d > max_dim) {
    throw Error(ErrorCode::DimensionTooLarge,
                "vertex enumeration for d=" + std::to_string(d) +
                    " exceeds cap " + std::to_string(max_dim));
  }
  const auto level = cluster_levels(lambda, eps);
  const std::size_t levels =
      d == 0 ? 0 : *std::max_element(level.begin(), level.end()) + 1;
  // Values of each level in ascending order; a vertex takes them in turn.
  std::vector<std::vector<double>> members(levels);
  for (std::size_t i = 0; i < d; ++i) members[level[i]].push_back(lambda[i]);
  for (auto& m : members) std::sort(m.begin(), m.end());

  std::vector<std::size_t> pattern(level.begin(), level.end());
  std::sort(pattern.begin(), pattern.end());
  VertexSet out;
  do {
    std::vector<std::size_t> used(levels, 0);
    PopulationVector v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = members[pattern[i]][used[pattern[i]]++];
    out.vertices.push_back(std::move(v));
  } while (std::next_permutation(pattern.begin(), pattern.end()));
  return out;
}

/// All index pairs (k, l) with p[k] < p[l] whose value levels are adjacent.
/// Degenerate levels contribute every index pair realizing the adjacency.
inline std::vector<AvSwap> av_swaps(std::span<const double> p, double eps) {
  const auto level = cluster_levels(p, eps);
  if (p.empty()) return {};
  const std::size_t levels = *std::max_element(level.begin(), level.end()) + 1;
  std::vector<std::vector<std::size_t>> at_level(levels);
  for (std::size_t i = 0; i < p.size(); ++i) at_level[level[i]].push_back(i);
  std::vector<AvSwap> out;
  for (std::size_t v = 0; v + 1 < levels; ++v) {
    for (std::size_t k : at_level[v]) {
      for (std::size_t l : at_level[v + 1]) out.push_back({k, l});
    }
  }
  return out;
}

inline PopulationVector apply_swap(PopulationVector p, std::size_t i, std::size_t j) {
  std::swap(p[i], p[j]);
  return p;
}

inline bool same_vector(std::span<const double> x, std::span<const double> y,
                        double eps) {
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i] - y[i]) > eps) return false;
  }
  return true;
}

/// True iff p is a permutation of lambda within eps.
inline bool is_permutation_of(std::span<const double> p, std::span<const double> lambda,
                              double eps) {
  if (p.size() != lambda.size()) return false;
  std::vector<double> a(p.begin(), p.end());
  std::vector<double> b(lambda.begin(), lambda.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return same_vector(a, b, eps);
}

namespace detail {

inline std::size_t find_vertex(const VertexSet& vset, std::span<const double> v,
                               double eps) {
  for (std::size_t i = 0; i < vset.vertices.size(); ++i) {
    if (same_vector(vset.vertices[i], v, eps)) return i;
  }
  throw Error(ErrorCode::NotAVertex, "point is not in the vertex set");
}

}  // namespace detail

/// Brute-force edge test that does not use the av-swap characterization.
/// The segment [v1, v2] is an edge iff its midpoint admits no convex
/// representation over the vertex set that puts positive weight outside
/// {v1, v2}; the maximal such weight is found by a small LP.
inline bool is_edge(std::span<const double> v1, std::span<const double> v2,
                    const VertexSet& vset, double eps, double lp_tol = 1e-9) {
  const std::size_t i1 = detail::find_vertex(vset, v1, eps);
  const std::size_t i2 = detail::find_vertex(vset, v2, eps);
  if (i1 == i2) return false;
  const std::size_t n = vset.count();
  if (n == 2) return true;
  const std::size_t d = v1.size();

  // Coordinates 0..d-2 plus the weight normalization; the last coordinate is
  // implied because every vertex has the same coordinate sum.
  lp::Problem prob;
  prob.rows = d;
  prob.cols = n;
  prob.A.assign(prob.rows * prob.cols, 0.0);
  prob.b.assign(prob.rows, 0.0);
  prob.c.assign(n, 1.0);
  prob.c[i1] = 0.0;
  prob.c[i2] = 0.0;
  for (std::size_t w = 0; w < n; ++w) {
    const auto& vert = vset.vertices[w];
    for (std::size_t r = 0; r + 1 < d; ++r) prob.at(r, w) = vert[r];
    prob.at(d - 1, w) = 1.0;
  }
  for (std::size_t r = 0; r + 1 < d; ++r) prob.b[r] = 0.5 * (v1[r] + v2[r]);
  prob.b[d - 1] = 1.0;

  const auto sol = lp::maximize(std::move(prob));
  if (!sol) {
    throw Error(ErrorCode::NotAVertex, "is_edge: midpoint LP infeasible");
  }
  return sol->objective <= lp_tol;
}

/// Vertices reachable from v by one av-swap, deduplicated.
inline std::vector<PopulationVector> av_swap_neighbors(std::span<const double> v,
                                                       double eps) {
  std::vector<PopulationVector> out;
  const PopulationVector base(v.begin(), v.end());
  for (const auto& s : av_swaps(v, eps)) {
    auto w = apply_swap(base, s.k, s.l);
    const bool seen = std::any_of(out.begin(), out.end(), [&](const auto& u) {
      return same_vector(u, w, eps);
    });
    if (!seen) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace trajopt
