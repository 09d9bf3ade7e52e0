#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "trajopt/core.hpp"
#include "trajopt/error.hpp"

namespace trajopt {

/// Doubly-stochastic map mixing coordinates i and j:
///   p'_i = t p_i + (1 - t) p_j,   p'_j = (1 - t) p_i + t p_j.
/// t = 1 is the identity and t = 0 the transposition.
struct TTransform {
  std::size_t i = 0;
  std::size_t j = 0;
  double t = 1.0;
  std::size_t dim = 0;
};

/// Real rotation in the (i, j) plane; its entrywise square is the
/// TTransform with t = cos^2(theta).
struct TwoLevelRotation {
  std::size_t i = 0;
  std::size_t j = 0;
  double theta = 0.0;
  std::size_t dim = 0;
};

namespace detail {

inline void check_pair(std::size_t i, std::size_t j, std::size_t dim) {
  if (i >= dim || j >= dim || i == j) {
    throw Error(ErrorCode::IndexOutOfRange,
                "two-level pair (" + std::to_string(i) + "," + std::to_string(j) +
                    ") invalid for dim " + std::to_string(dim));
  }
}

}  // namespace detail

inline void check(const TTransform& tt) {
  detail::check_pair(tt.i, tt.j, tt.dim);
  if (!(tt.t >= 0.0 && tt.t <= 1.0)) {
    throw Error(ErrorCode::TOutOfRange, "t=" + std::to_string(tt.t) + " outside [0,1]");
  }
}

inline PopulationVector apply(const TTransform& tt, PopulationVector p) {
  check(tt);
  if (p.size() != tt.dim) {
    throw Error(ErrorCode::DimensionMismatch, "T-transform dimension mismatch");
  }
  const double pi = p[tt.i];
  const double pj = p[tt.j];
  p[tt.i] = tt.t * pi + (1.0 - tt.t) * pj;
  p[tt.j] = (1.0 - tt.t) * pi + tt.t * pj;
  return p;
}

/// theta = arccos(sqrt(t)) in [0, pi/2].
inline TwoLevelRotation rotation_for(const TTransform& tt) {
  check(tt);
  return {tt.i, tt.j, std::acos(std::sqrt(tt.t)), tt.dim};
}

}  // namespace trajopt
