#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajopt/error.hpp"
#include "trajopt/majorization.hpp"

namespace trajopt {

using Vector = std::vector<double>;

/// Diagonal of a transformed state in the preferred basis. Always indexed by
/// the caller's original basis labels, never by sorted position.
using PopulationVector = std::vector<double>;

using Permutation = std::vector<std::size_t>;

/// Absolute tolerance when comparing target/cost/conserved coefficients.
inline constexpr double kCoefficientEps = 1e-12;
/// |sum(lambda) - 1| above this is rejected; below it lambda is rescaled.
inline constexpr double kNormalizationTol = 1e-9;
/// Slack accepted on alpha range checks before AlphaOutOfRange.
inline constexpr double kAlphaTol = 1e-9;

struct ProblemInstance {
  Vector lambda;  // spectrum of the initial state
  Vector target;  // a
  Vector cost;    // E
  std::optional<Vector> conserved;            // c
  std::optional<Vector> initial_populations;  // diagonal of rho, for alpha_in
  double eps_pop = 1e-12;
  double eps_grad = 1e-12;

  std::size_t dim() const { return lambda.size(); }
};

/// perm[pos] is the original index sitting at preferred position pos;
/// inverse[original] is its preferred position.
struct PreferredOrder {
  Permutation perm;
  Permutation inverse;
};

inline double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "dot: lengths differ");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double target_value(std::span<const double> p,
                           std::span<const double> a) {
  return dot(p, a);
}

inline double cost_value(std::span<const double> p,
                         std::span<const double> e) {
  return dot(p, e);
}

/// Assigns each entry an integer level; sorted values start a new level when
/// they exceed the previous value by more than eps. Levels ascend with value.
inline std::vector<std::size_t> cluster_levels(std::span<const double> values,
                                               double eps) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    return values[i] < values[j];
  });
  std::vector<std::size_t> level(n, 0);
  std::size_t current = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r > 0 && values[idx[r]] - values[idx[r - 1]] > eps) ++current;
    level[idx[r]] = current;
  }
  return level;
}

inline Permutation invert(std::span<const std::size_t> perm) {
  Permutation inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  return inv;
}

/// Sorts basis labels by (target, cost, original index), with coefficient
/// equality judged within eps.
inline PreferredOrder preferred_order(std::span<const double> target,
                                      std::span<const double> cost,
                                      double eps = kCoefficientEps) {
  if (target.size() != cost.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "preferred_order: target and cost lengths differ");
  }
  const auto a_level = cluster_levels(target, eps);
  const auto e_level = cluster_levels(cost, eps);
  PreferredOrder order;
  order.perm.resize(target.size());
  std::iota(order.perm.begin(), order.perm.end(), std::size_t{0});
  std::sort(order.perm.begin(), order.perm.end(),
            [&](std::size_t i, std::size_t j) {
              if (a_level[i] != a_level[j]) return a_level[i] < a_level[j];
              if (e_level[i] != e_level[j]) return e_level[i] < e_level[j];
              return i < j;
            });
  order.inverse = invert(order.perm);
  return order;
}

namespace detail {

inline void require_finite(std::span<const double> v, const char* field) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::NonFinite, std::string(field) + " has a non-finite entry");
    }
  }
}

inline void require_length(std::size_t n, std::size_t d, const char* field) {
  if (n != d) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(field) + " has length " + std::to_string(n) +
                    ", expected " + std::to_string(d));
  }
}

}  // namespace detail

/// Enforces the instance invariants and rescales lambda to unit sum when it
/// is already within kNormalizationTol of 1.
inline ProblemInstance validate(ProblemInstance raw) {
  const std::size_t d = raw.lambda.size();
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "eigenvalues is empty");
  detail::require_length(raw.target.size(), d, "target");
  detail::require_length(raw.cost.size(), d, "cost");
  if (raw.conserved) detail::require_length(raw.conserved->size(), d, "conserved");
  if (raw.initial_populations) {
    detail::require_length(raw.initial_populations->size(), d, "initial_populations");
  }
  if (!(raw.eps_pop > 0.0) || !(raw.eps_grad > 0.0)) {
    throw Error(ErrorCode::NonPositiveTolerance, "eps_pop and eps_grad must be > 0");
  }
  detail::require_finite(raw.lambda, "eigenvalues");
  detail::require_finite(raw.target, "target");
  detail::require_finite(raw.cost, "cost");
  if (raw.conserved) detail::require_finite(*raw.conserved, "conserved");
  if (raw.initial_populations) {
    detail::require_finite(*raw.initial_populations, "initial_populations");
  }

  for (double& x : raw.lambda) {
    if (x < -kCoefficientEps) {
      throw Error(ErrorCode::NegativeEigenvalue,
                  "eigenvalue " + std::to_string(x) + " is negative");
    }
    x = std::max(x, 0.0);
  }
  const double total = std::accumulate(raw.lambda.begin(), raw.lambda.end(), 0.0);
  if (std::abs(total - 1.0) > kNormalizationTol) {
    throw Error(ErrorCode::NotNormalized,
                "eigenvalues sum to " + std::to_string(total));
  }
  // a sum off by rounding only is left alone, which keeps validation idempotent
  const double rounding = static_cast<double>(d) * std::numeric_limits<double>::epsilon();
  if (std::abs(total - 1.0) > rounding) {
    for (double& x : raw.lambda) x /= total;
  }

  if (raw.initial_populations) {
    auto& p = *raw.initial_populations;
    for (double& x : p) {
      if (x < -kCoefficientEps) {
        throw Error(ErrorCode::NegativeEigenvalue, "initial population is negative");
      }
      x = std::max(x, 0.0);
    }
    if (!majorizes(raw.lambda, p, kNormalizationTol)) {
      throw Error(ErrorCode::NotMajorized,
                  "initial_populations are not majorized by the eigenvalues");
    }
  }
  return raw;
}

}  // namespace trajopt
