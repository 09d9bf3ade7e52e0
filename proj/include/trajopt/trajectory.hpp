#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trajopt/core.hpp"
#include "trajopt/error.hpp"
#include "trajopt/polytope.hpp"
#include "trajopt/transforms.hpp"

namespace trajopt {

/// Index sets whose populations may be mixed with each other. A plain
/// problem has a single block; a conserved observable splits it.
using Blocks = std::vector<std::vector<std::size_t>>;

/// One av-swap on the trajectory. k has the larger target coefficient and the
/// smaller population before the swap (original basis labels).
struct SwapStep {
  std::size_t k = 0;
  std::size_t l = 0;
  double delta_alpha = 0.0;
  double gradient = 0.0;
  double alpha_start = 0.0;
  double alpha_end = 0.0;
};

struct Breakpoint {
  double alpha = 0.0;
  double omega = 0.0;
};

/// Vertices joined by av-swap edges together with the piecewise-linear
/// minimal cost function they trace. vertices[i] and vertices[i + 1] differ by
/// the transposition steps[i]; breakpoints[i] is (a.V_i, E.V_i).
struct OptimalTrajectory {
  PreferredOrder order;
  Blocks blocks;
  /// vertices.front()[i] == lambda[start_source[i]].
  Permutation start_source;
  std::vector<PopulationVector> vertices;
  std::vector<SwapStep> steps;
  std::vector<Breakpoint> breakpoints;
  double eps_pop = 1e-12;
  double eps_grad = 1e-12;

  double alpha_min() const { return breakpoints.front().alpha; }
  double alpha_max() const { return breakpoints.back().alpha; }
  std::size_t dim() const { return vertices.front().size(); }
};

/// A point on the trajectory: population, active segment and the fraction r
/// travelled along it (p = (1 - r) V_s + r V_{s+1}).
struct StatePoint {
  PopulationVector populations;
  std::size_t segment = 0;
  double t = 0.0;
};

inline Blocks single_block(std::size_t d) {
  Blocks b(1);
  b[0].resize(d);
  std::iota(b[0].begin(), b[0].end(), std::size_t{0});
  return b;
}

namespace detail {

inline PopulationVector gather(std::span<const double> lambda,
                               std::span<const std::size_t> source) {
  PopulationVector p(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) p[i] = lambda[source[i]];
  return p;
}

// Per block: order positions by `key_less`, then hand out the block's
// eigenvalues in descending (minimal) or ascending (maximal) order.
template <class KeyLess>
Permutation extreme_source(const ProblemInstance& inst, const Blocks& blocks,
                           bool descending, KeyLess key_less) {
  Permutation source(inst.dim());
  for (const auto& block : blocks) {
    std::vector<std::size_t> positions(block.begin(), block.end());
    std::sort(positions.begin(), positions.end(), key_less);
    std::vector<std::size_t> values(block.begin(), block.end());
    std::stable_sort(values.begin(), values.end(), [&](std::size_t i, std::size_t j) {
      return descending ? inst.lambda[i] > inst.lambda[j] : inst.lambda[i] < inst.lambda[j];
    });
    for (std::size_t r = 0; r < positions.size(); ++r) source[positions[r]] = values[r];
  }
  return source;
}

inline Permutation minimal_source(const ProblemInstance& inst, const PreferredOrder& order,
                                  const Blocks& blocks) {
  return extreme_source(inst, blocks, true, [&](std::size_t i, std::size_t j) {
    return order.inverse[i] < order.inverse[j];
  });
}

// Ascending target, then descending cost: the smallest eigenvalues go to the
// lowest targets, and inside an equal-target group the larger ones sit at
// lower cost.
inline Permutation maximal_source(const ProblemInstance& inst, const Blocks& blocks) {
  const auto a_level = cluster_levels(inst.target, kCoefficientEps);
  const auto e_level = cluster_levels(inst.cost, kCoefficientEps);
  return extreme_source(inst, blocks, false, [&](std::size_t i, std::size_t j) {
    if (a_level[i] != a_level[j]) return a_level[i] < a_level[j];
    if (e_level[i] != e_level[j]) return e_level[i] > e_level[j];
    return i < j;
  });
}

// Matches a vertex back to the eigenvalue labels it was built from, block by
// block. Throws NotAVertex if some block is not a permutation of its spectrum.
inline Permutation source_of(std::span<const double> vertex, std::span<const double> lambda,
                             const Blocks& blocks, double eps) {
  Permutation source(vertex.size());
  for (const auto& block : blocks) {
    std::vector<std::size_t> pos(block.begin(), block.end());
    std::vector<std::size_t> val(block.begin(), block.end());
    std::stable_sort(pos.begin(), pos.end(),
                     [&](std::size_t i, std::size_t j) { return vertex[i] > vertex[j]; });
    std::stable_sort(val.begin(), val.end(),
                     [&](std::size_t i, std::size_t j) { return lambda[i] > lambda[j]; });
    for (std::size_t r = 0; r < pos.size(); ++r) {
      if (std::abs(vertex[pos[r]] - lambda[val[r]]) > eps) {
        throw Error(ErrorCode::NotAVertex,
                    "population vector is not a permutation of the spectrum within its block");
      }
      source[pos[r]] = val[r];
    }
  }
  return source;
}

inline double vertex_tolerance(const ProblemInstance& inst) {
  return std::max(inst.eps_pop, 1e-9);
}

inline std::optional<SwapStep> next_step(std::span<const double> p, const ProblemInstance& inst,
                                         const PreferredOrder& order, const Blocks& blocks) {
  std::optional<SwapStep> best;
  std::size_t best_pk = 0;
  std::size_t best_pl = 0;
  std::vector<double> sub;
  for (const auto& block : blocks) {
    sub.resize(block.size());
    for (std::size_t r = 0; r < block.size(); ++r) sub[r] = p[block[r]];
    for (const auto& s : av_swaps(sub, inst.eps_pop)) {
      const std::size_t k = block[s.k];
      const std::size_t l = block[s.l];
      const double da = inst.target[k] - inst.target[l];
      if (da <= kCoefficientEps) continue;
      const double grad = (inst.cost[k] - inst.cost[l]) / da;
      const std::size_t pk = order.inverse[k];
      const std::size_t pl = order.inverse[l];
      bool take = !best;
      if (best) {
        if (grad < best->gradient - inst.eps_grad) {
          take = true;
        } else if (std::abs(grad - best->gradient) <= inst.eps_grad &&
                   std::pair(pk, pl) < std::pair(best_pk, best_pl)) {
          take = true;
        }
      }
      if (take) {
        SwapStep step;
        step.k = k;
        step.l = l;
        step.gradient = grad;
        step.delta_alpha = da * (p[l] - p[k]);
        best = step;
        best_pk = pk;
        best_pl = pl;
      }
    }
  }
  if (best) {
    best->alpha_start = target_value(p, inst.target);
    best->alpha_end = best->alpha_start + best->delta_alpha;
  }
  return best;
}

inline OptimalTrajectory run(const ProblemInstance& inst, PreferredOrder order, Blocks blocks,
                             Permutation source) {
  OptimalTrajectory traj;
  traj.order = std::move(order);
  traj.blocks = std::move(blocks);
  traj.start_source = std::move(source);
  traj.eps_pop = inst.eps_pop;
  traj.eps_grad = inst.eps_grad;

  PopulationVector p = gather(inst.lambda, traj.start_source);
  traj.breakpoints.push_back({target_value(p, inst.target), cost_value(p, inst.cost)});
  traj.vertices.push_back(p);

  const std::size_t d = inst.dim();
  const std::size_t max_steps = d * d + 1;
  while (auto step = next_step(p, inst, traj.order, traj.blocks)) {
    if (traj.steps.size() >= max_steps) {
      throw std::logic_error("trajectory failed to terminate");
    }
    std::swap(p[step->k], p[step->l]);
    Breakpoint bp{target_value(p, inst.target), cost_value(p, inst.cost)};
    const double start = traj.breakpoints.back().alpha;
    if (!(bp.alpha > start)) bp.alpha = start + step->delta_alpha;
    step->alpha_start = start;
    step->alpha_end = bp.alpha;
    step->delta_alpha = bp.alpha - start;
    traj.steps.push_back(*step);
    traj.breakpoints.push_back(bp);
    traj.vertices.push_back(p);
  }
  return traj;
}

}  // namespace detail

/// Largest eigenvalue on the lowest (target, cost) label and so on down.
inline PopulationVector minimal_vertex(const ProblemInstance& inst, const PreferredOrder& order) {
  return detail::gather(inst.lambda,
                        detail::minimal_source(inst, order, single_block(inst.dim())));
}

/// Smallest eigenvalues on the lowest targets; inside an equal-target group
/// the larger populations sit at lower cost.
inline PopulationVector maximal_vertex(const ProblemInstance& inst, const PreferredOrder&) {
  return detail::gather(inst.lambda, detail::maximal_source(inst, single_block(inst.dim())));
}

/// The target-increasing av-swap of minimal gradient (E_k - E_l)/(a_k - a_l)
/// at vertex p, or nullopt at the maximal point.
inline std::optional<SwapStep> next_step(std::span<const double> p,
                                         const ProblemInstance& inst) {
  if (!is_permutation_of(p, inst.lambda, detail::vertex_tolerance(inst))) {
    throw Error(ErrorCode::NotAVertex, "next_step: p is not a permutation of lambda");
  }
  return detail::next_step(p, inst, preferred_order(inst.target, inst.cost),
                           single_block(inst.dim()));
}

/// Optimal trajectory with populations mixed only inside each block.
inline OptimalTrajectory build_in_blocks(const ProblemInstance& inst, Blocks blocks) {
  auto order = preferred_order(inst.target, inst.cost);
  auto source = detail::minimal_source(inst, order, blocks);
  return detail::run(inst, std::move(order), std::move(blocks), std::move(source));
}

inline OptimalTrajectory build(const ProblemInstance& inst) {
  return build_in_blocks(inst, single_block(inst.dim()));
}

/// Greedy av-swap continuation from an arbitrary vertex (for instance a
/// diagonal initial state) up to the maximal point.
inline OptimalTrajectory continue_from(const ProblemInstance& inst,
                                       std::span<const double> start, Blocks blocks) {
  if (start.size() != inst.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "continue_from: start has wrong length");
  }
  auto source = detail::source_of(start, inst.lambda, blocks, detail::vertex_tolerance(inst));
  return detail::run(inst, preferred_order(inst.target, inst.cost), std::move(blocks),
                     std::move(source));
}

inline OptimalTrajectory continue_from(const ProblemInstance& inst,
                                       std::span<const double> start) {
  return continue_from(inst, start, single_block(inst.dim()));
}

namespace detail {

// Segment index and fraction along it; alpha is clamped into range when
// within kAlphaTol of an end.
inline std::pair<std::size_t, double> locate(const OptimalTrajectory& traj, double alpha) {
  const double lo = traj.alpha_min();
  const double hi = traj.alpha_max();
  if (!(alpha >= lo - kAlphaTol && alpha <= hi + kAlphaTol)) {
    throw Error(ErrorCode::AlphaOutOfRange,
                "alpha=" + std::to_string(alpha) + " outside [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
  }
  alpha = std::clamp(alpha, lo, hi);
  if (traj.steps.empty()) return {0, 0.0};
  const auto& bps = traj.breakpoints;
  auto it = std::upper_bound(bps.begin(), bps.end(), alpha,
                             [](double x, const Breakpoint& b) { return x < b.alpha; });
  std::size_t seg = static_cast<std::size_t>(it - bps.begin());
  seg = seg == 0 ? 0 : seg - 1;
  seg = std::min(seg, traj.steps.size() - 1);
  const double a0 = bps[seg].alpha;
  const double a1 = bps[seg + 1].alpha;
  const double r = std::clamp((alpha - a0) / (a1 - a0), 0.0, 1.0);
  return {seg, r};
}

}  // namespace detail

/// Piecewise-linear interpolation of the breakpoints.
inline double omega_opt(const OptimalTrajectory& traj, double alpha) {
  const auto [seg, r] = detail::locate(traj, alpha);
  if (traj.steps.empty()) return traj.breakpoints.front().omega;
  const auto& b0 = traj.breakpoints[seg];
  const auto& b1 = traj.breakpoints[seg + 1];
  if (r == 1.0) return b1.omega;
  return b0.omega + r * (b1.omega - b0.omega);
}

/// Population on the active segment whose target value is alpha.
inline StatePoint state_at(const OptimalTrajectory& traj, double alpha) {
  const auto [seg, r] = detail::locate(traj, alpha);
  StatePoint out;
  out.segment = seg;
  out.t = r;
  if (traj.steps.empty()) {
    out.populations = traj.vertices.front();
    return out;
  }
  const auto& v0 = traj.vertices[seg];
  const auto& v1 = traj.vertices[seg + 1];
  out.populations.resize(v0.size());
  for (std::size_t i = 0; i < v0.size(); ++i) {
    out.populations[i] = r == 1.0 ? v1[i] : (1.0 - r) * v0[i] + r * v1[i];
  }
  return out;
}

/// The part of the trajectory from the segment containing alpha onwards. When
/// alpha sits on a vertex that vertex becomes the start.
inline OptimalTrajectory tail_from(const OptimalTrajectory& traj, double alpha) {
  auto [seg, r] = detail::locate(traj, alpha);
  if (traj.steps.empty()) return traj;
  if (r == 1.0) ++seg;
  OptimalTrajectory out;
  out.order = traj.order;
  out.blocks = traj.blocks;
  out.eps_pop = traj.eps_pop;
  out.eps_grad = traj.eps_grad;
  out.start_source = traj.start_source;
  for (std::size_t s = 0; s < seg; ++s) {
    std::swap(out.start_source[traj.steps[s].k], out.start_source[traj.steps[s].l]);
  }
  out.vertices.assign(traj.vertices.begin() + static_cast<std::ptrdiff_t>(seg), traj.vertices.end());
  out.steps.assign(traj.steps.begin() + static_cast<std::ptrdiff_t>(seg), traj.steps.end());
  out.breakpoints.assign(traj.breakpoints.begin() + static_cast<std::ptrdiff_t>(seg),
                         traj.breakpoints.end());
  return out;
}

struct Uniqueness {
  bool unique = false;
  /// 1, 2 or 3 for the first condition that holds; 0 when not unique.
  int condition = 0;
};

/// Whether the minimal point is unique: (1) all target coefficients
/// distinct, else (2) equal targets always carry distinct costs, else (3) the
/// labels sharing both target and cost receive equal eigenvalues.
inline Uniqueness uniqueness_at_minimum(const ProblemInstance& inst) {
  const std::size_t d = inst.dim();
  const auto a_level = cluster_levels(inst.target, kCoefficientEps);
  const auto e_level = cluster_levels(inst.cost, kCoefficientEps);
  bool distinct_a = true;
  bool distinct_e_within_a = true;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (a_level[i] == a_level[j]) {
        distinct_a = false;
        if (e_level[i] == e_level[j]) distinct_e_within_a = false;
      }
    }
  }
  if (distinct_a) return {true, 1};
  if (distinct_e_within_a) return {true, 2};

  const auto order = preferred_order(inst.target, inst.cost);
  const auto p = minimal_vertex(inst, order);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (a_level[i] == a_level[j] && e_level[i] == e_level[j] &&
          std::abs(p[i] - p[j]) > inst.eps_pop) {
        return {false, 0};
      }
    }
  }
  return {true, 3};
}

/// Route from the diagonal state diag(lambda) onto the trajectory at alpha_in:
/// the permutation `source` (p[i] = lambda[source[i]]) followed by the
/// T-transforms in `chain`, applied in order.
struct EntryPoint {
  StatePoint state;
  Permutation source;
  std::vector<TTransform> chain;
};

/// Replays the trajectory: full swaps (t = 0) for completed steps and one
/// partial T-transform (t = 1 - r) on the active segment.
inline EntryPoint entry_point(const OptimalTrajectory& traj, double alpha_in) {
  EntryPoint out;
  out.state = state_at(traj, alpha_in);
  out.source = traj.start_source;
  const std::size_t d = traj.dim();
  for (std::size_t s = 0; s < out.state.segment && s < traj.steps.size(); ++s) {
    out.chain.push_back({traj.steps[s].k, traj.steps[s].l, 0.0, d});
  }
  if (!traj.steps.empty() && out.state.t > 0.0) {
    const auto& step = traj.steps[out.state.segment];
    out.chain.push_back({step.k, step.l, 1.0 - out.state.t, d});
  }
  return out;
}

}  // namespace trajopt
