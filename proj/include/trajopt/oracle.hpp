#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "trajopt/core.hpp"
#include "trajopt/error.hpp"
#include "trajopt/lift.hpp"
#include "trajopt/polytope.hpp"
#include "trajopt/trajectory.hpp"

namespace trajopt {

/// (alpha, epsilon) = (a.p, E.p) of one population vector.
struct CostPoint {
  double alpha = 0.0;
  double epsilon = 0.0;
};

/// Image of the population polytope under (a, E).
struct InducedPolygon {
  std::vector<CostPoint> points;          // one per polytope vertex
  std::vector<CostPoint> hull;            // counter-clockwise from the lower-left corner
  std::vector<CostPoint> lower_envelope;  // alpha strictly increasing
  std::vector<CostPoint> upper_envelope;  // alpha strictly increasing
  double alpha_min = 0.0;
  double alpha_max = 0.0;
};

namespace detail {

inline double cross(const CostPoint& o, const CostPoint& a, const CostPoint& b) {
  return (a.alpha - o.alpha) * (b.epsilon - o.epsilon) - (a.epsilon - o.epsilon) * (b.alpha - o.alpha);
}

// Monotone-chain half hull over points sorted by alpha; `sign` = +1 keeps the
// lower chain, -1 the upper one. Collinear points are dropped.
inline std::vector<CostPoint> half_hull(std::span<const CostPoint> sorted, double sign) {
  std::vector<CostPoint> h;
  for (const auto& p : sorted) {
    while (h.size() >= 2 && sign * cross(h[h.size() - 2], h.back(), p) <= 0.0) h.pop_back();
    h.push_back(p);
  }
  return h;
}

}  // namespace detail

/// Andrew's monotone chain. Returns the hull counter-clockwise without the
/// closing point; collinear points are dropped.
inline std::vector<CostPoint> convex_hull(std::vector<CostPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const CostPoint& x, const CostPoint& y) {
    return x.alpha < y.alpha || (x.alpha == y.alpha && x.epsilon < y.epsilon);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const CostPoint& x, const CostPoint& y) {
                          return x.alpha == y.alpha && x.epsilon == y.epsilon;
                        }),
            pts.end());
  if (pts.size() < 3) return pts;
  std::vector<CostPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && detail::cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && detail::cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0.0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

/// Projects every vertex to (a.V, E.V). Alphas closer than alpha_eps are
/// merged; the lower envelope keeps the smallest epsilon of each group and the
/// upper envelope the largest.
inline InducedPolygon induced_polygon(const VertexSet& vset, std::span<const double> a,
                                      std::span<const double> e, double alpha_eps = 1e-12) {
  if (vset.vertices.empty()) throw Error(ErrorCode::DimensionMismatch, "induced_polygon: no vertices");
  InducedPolygon poly;
  for (const auto& v : vset.vertices) poly.points.push_back({target_value(v, a), cost_value(v, e)});
  poly.hull = convex_hull(poly.points);

  std::vector<CostPoint> sorted = poly.points;
  std::sort(sorted.begin(), sorted.end(),
            [](const CostPoint& x, const CostPoint& y) { return x.alpha < y.alpha; });
  std::vector<CostPoint> lows;
  std::vector<CostPoint> highs;
  for (const auto& p : sorted) {
    if (!lows.empty() && p.alpha - lows.back().alpha <= alpha_eps) {
      lows.back().epsilon = std::min(lows.back().epsilon, p.epsilon);
      highs.back().epsilon = std::max(highs.back().epsilon, p.epsilon);
    } else {
      lows.push_back(p);
      highs.push_back(p);
    }
  }
  poly.lower_envelope = detail::half_hull(lows, 1.0);
  poly.upper_envelope = detail::half_hull(highs, -1.0);
  poly.alpha_min = lows.front().alpha;
  poly.alpha_max = lows.back().alpha;
  return poly;
}

inline InducedPolygon induced_polygon(std::span<const double> lambda, std::span<const double> a,
                                      std::span<const double> e, double eps = 1e-12,
                                      std::size_t max_dim = kDefaultMaxEnumDim) {
  return induced_polygon(enumerate_vertices(lambda, eps, max_dim), a, e);
}

namespace detail {

inline double interpolate(std::span<const CostPoint> chain, double alpha, double lo, double hi) {
  if (!(alpha >= lo - kAlphaTol && alpha <= hi + kAlphaTol)) {
    throw Error(ErrorCode::AlphaOutOfRange,
                "alpha=" + std::to_string(alpha) + " outside [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
  }
  if (chain.size() == 1) return chain.front().epsilon;
  alpha = std::clamp(alpha, lo, hi);
  auto it = std::upper_bound(chain.begin(), chain.end(), alpha,
                             [](double x, const CostPoint& p) { return x < p.alpha; });
  std::size_t i = static_cast<std::size_t>(it - chain.begin());
  i = std::clamp<std::size_t>(i, 1, chain.size() - 1);
  const auto& p0 = chain[i - 1];
  const auto& p1 = chain[i];
  if (alpha == p1.alpha) return p1.epsilon;
  const double r = (alpha - p0.alpha) / (p1.alpha - p0.alpha);
  return p0.epsilon + r * (p1.epsilon - p0.epsilon);
}

}  // namespace detail

/// Minimal cost at alpha read off the lower envelope.
inline double envelope_min_cost(const InducedPolygon& poly, double alpha) {
  return detail::interpolate(poly.lower_envelope, alpha, poly.alpha_min, poly.alpha_max);
}

inline double envelope_max_cost(const InducedPolygon& poly, double alpha) {
  return detail::interpolate(poly.upper_envelope, alpha, poly.alpha_min, poly.alpha_max);
}

/// Random Birkhoff point: Dirichlet(1) weights over n_perms uniform random
/// permutation matrices. Each permutation only moves labels inside its block.
inline Matrix sample_block_doubly_stochastic(const Blocks& blocks, std::size_t d,
                                             std::size_t n_perms, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(std::max<std::size_t>(n_perms, 1));
  for (double& x : w) x = expo(rng);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  Matrix D = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  Permutation source(d);
  for (double weight : w) {
    std::iota(source.begin(), source.end(), std::size_t{0});
    for (const auto& block : blocks) {
      std::vector<std::size_t> shuffled(block.begin(), block.end());
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      for (std::size_t r = 0; r < block.size(); ++r) source[block[r]] = shuffled[r];
    }
    for (std::size_t i = 0; i < d; ++i) {
      D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(source[i])) += weight / total;
    }
  }
  return D;
}

inline Matrix sample_doubly_stochastic(std::size_t d, std::size_t n_perms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_block_doubly_stochastic(single_block(d), d, n_perms, rng);
}

struct AuditReport {
  std::size_t samples = 0;
  std::size_t in_range = 0;
  std::size_t violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  double tolerance = 1e-9;

  bool passed() const { return violations == 0; }
};

/// Samples D (mixing only inside the trajectory's blocks), maps lambda to
/// D lambda and checks epsilon >= omega_opt(alpha) - tol. Points with alpha
/// outside the trajectory range are counted but not judged. The number of
/// mixed permutations cycles through 1..d+1 so samples reach from the
/// vertices into the interior.
inline AuditReport monte_carlo_audit(const ProblemInstance& inst, const OptimalTrajectory& traj,
                                     std::size_t n_samples, std::uint64_t seed,
                                     double tol = 1e-9) {
  const std::size_t d = inst.dim();
  detail::require_length(traj.dim(), d, "trajectory");
  std::mt19937_64 rng(seed);
  const Eigen::VectorXd lam = to_eigen(inst.lambda);
  AuditReport report;
  report.tolerance = tol;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Matrix D = sample_block_doubly_stochastic(traj.blocks, d, 1 + s % (d + 1), rng);
    const Vector p = to_vector(D * lam);
    const double alpha = target_value(p, inst.target);
    const double eps = cost_value(p, inst.cost);
    ++report.samples;
    if (alpha < traj.alpha_min() - kAlphaTol || alpha > traj.alpha_max() + kAlphaTol) continue;
    ++report.in_range;
    const double slack = eps - omega_opt(traj, alpha);
    report.min_slack = std::min(report.min_slack, slack);
    if (slack < -tol) ++report.violations;
  }
  return report;
}

/// Extreme edge gradients at a vertex: the smallest dE/dalpha over edges that
/// raise alpha and the largest over edges that lower it. Edges are found by
/// the brute-force LP test; edges with no change in alpha are skipped.
struct EdgeGradients {
  std::optional<double> gamma_plus_min;
  std::optional<double> gamma_minus_max;
};

inline EdgeGradients edge_gradients(std::span<const double> v, const VertexSet& vset,
                                    std::span<const double> a, std::span<const double> e,
                                    double eps = 1e-12) {
  EdgeGradients out;
  const double alpha = target_value(v, a);
  const double cost = cost_value(v, e);
  for (const auto& w : vset.vertices) {
    if (same_vector(v, w, eps) || !is_edge(v, w, vset, eps)) continue;
    const double da = target_value(w, a) - alpha;
    if (std::abs(da) <= kCoefficientEps) continue;
    const double g = (cost_value(w, e) - cost) / da;
    if (da > 0) {
      out.gamma_plus_min = out.gamma_plus_min ? std::min(*out.gamma_plus_min, g) : g;
    } else {
      out.gamma_minus_max = out.gamma_minus_max ? std::max(*out.gamma_minus_max, g) : g;
    }
  }
  return out;
}

}  // namespace trajopt
