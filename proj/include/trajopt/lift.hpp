#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "trajopt/core.hpp"
#include "trajopt/error.hpp"
#include "trajopt/majorization.hpp"
#include "trajopt/trajectory.hpp"
#include "trajopt/transforms.hpp"

namespace trajopt {

using Matrix = Eigen::MatrixXd;

/// D = t|i><i| + (1-t)|i><j| + (1-t)|j><i| + t|j><j| + identity elsewhere.
inline Matrix t_transform_matrix(const TTransform& tt) {
  check(tt);
  Matrix D = Matrix::Identity(static_cast<Eigen::Index>(tt.dim),
                              static_cast<Eigen::Index>(tt.dim));
  const auto i = static_cast<Eigen::Index>(tt.i);
  const auto j = static_cast<Eigen::Index>(tt.j);
  D(i, i) = tt.t;
  D(j, j) = tt.t;
  D(i, j) = 1.0 - tt.t;
  D(j, i) = 1.0 - tt.t;
  return D;
}

/// U = cos|i><i| + sin|i><j| - sin|j><i| + cos|j><j| + identity elsewhere.
inline Matrix rotation_matrix(const TwoLevelRotation& rot) {
  detail::check_pair(rot.i, rot.j, rot.dim);
  Matrix U = Matrix::Identity(static_cast<Eigen::Index>(rot.dim),
                              static_cast<Eigen::Index>(rot.dim));
  const auto i = static_cast<Eigen::Index>(rot.i);
  const auto j = static_cast<Eigen::Index>(rot.j);
  const double c = std::cos(rot.theta);
  const double s = std::sin(rot.theta);
  U(i, i) = c;
  U(j, j) = c;
  U(i, j) = s;
  U(j, i) = -s;
  return U;
}

/// D_mn = |u_mn|^2.
template <class Derived>
Matrix unistochastic_of(const Eigen::MatrixBase<Derived>& U) {
  if (U.rows() != U.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "unistochastic_of: matrix is not square");
  }
  return U.cwiseAbs2().template cast<double>();
}

/// Permutation matrix P with (P lambda)[i] = lambda[source[i]].
inline Matrix permutation_matrix(std::span<const std::size_t> source) {
  const auto d = static_cast<Eigen::Index>(source.size());
  Matrix P = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < source.size(); ++i) {
    P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(source[i])) = 1.0;
  }
  return P;
}

/// A trajectory point realized in matrix form.
///   unitary = rotations * permutation, doubly_stochastic = |unitary|^2,
///   density_diagonal = diag(rotations diag(V_0) rotations^T) = D lambda.
struct LiftedPoint {
  Matrix permutation;  // diag(lambda) -> diag(V_0)
  Matrix rotations;    // product of two-level rotations along the trajectory
  Matrix unitary;
  Matrix doubly_stochastic;
  Vector density_diagonal;
};

inline Vector to_vector(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Composes the permutation onto the start vertex, full rotations for every
/// completed step and one partial rotation theta = arccos(sqrt(1 - r)).
inline LiftedPoint lift_point(const OptimalTrajectory& traj, double alpha) {
  const auto entry = entry_point(traj, alpha);
  const std::size_t d = traj.dim();
  LiftedPoint out;
  out.permutation = permutation_matrix(entry.source);
  out.rotations = Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (const auto& tt : entry.chain) {
    out.rotations = rotation_matrix(rotation_for(tt)) * out.rotations;
  }
  out.unitary = out.rotations * out.permutation;
  out.doubly_stochastic = unistochastic_of(out.unitary);
  const Eigen::VectorXd v0 = to_eigen(traj.vertices.front());
  const Matrix rho = out.rotations * v0.asDiagonal() * out.rotations.transpose();
  out.density_diagonal = to_vector(rho.diagonal());
  return out;
}

/// Hardy-Littlewood-Polya construction: a permutation followed by at most
/// d - 1 T-transforms taking `source` to any `target` it majorizes.
struct TransformChain {
  Permutation source;  // first step: p[i] = x[source[i]]
  std::vector<TTransform> chain;
};

inline TransformChain hlp_chain(std::span<const double> x, std::span<const double> y,
                                double eps = 1e-12) {
  const std::size_t d = x.size();
  if (y.size() != d) throw Error(ErrorCode::DimensionMismatch, "hlp_chain: lengths differ");
  if (!majorizes(x, y, 1e-9)) {
    throw Error(ErrorCode::NotMajorized, "hlp_chain: target is not majorized by source");
  }
  // rank r of y (descending) lives at position ypos[r]; x is laid out on the
  // same positions in descending order so both vectors share one ordering.
  std::vector<std::size_t> ypos(d);
  std::iota(ypos.begin(), ypos.end(), std::size_t{0});
  std::stable_sort(ypos.begin(), ypos.end(), [&](std::size_t i, std::size_t j) { return y[i] > y[j]; });
  std::vector<std::size_t> xrank(d);
  std::iota(xrank.begin(), xrank.end(), std::size_t{0});
  std::stable_sort(xrank.begin(), xrank.end(), [&](std::size_t i, std::size_t j) { return x[i] > x[j]; });

  TransformChain out;
  out.source.resize(d);
  std::vector<double> z(d);  // working vector in rank space
  for (std::size_t r = 0; r < d; ++r) {
    out.source[ypos[r]] = xrank[r];
    z[r] = x[xrank[r]];
  }
  std::vector<double> yr(d);
  for (std::size_t r = 0; r < d; ++r) yr[r] = y[ypos[r]];

  for (std::size_t iter = 0; iter < d; ++iter) {
    // j: largest rank with z > y; k: smallest rank after j with z < y.
    std::size_t j = d;
    for (std::size_t r = 0; r < d; ++r) {
      if (z[r] > yr[r] + eps) j = r;
    }
    if (j == d) break;
    std::size_t k = d;
    for (std::size_t r = j + 1; r < d; ++r) {
      if (z[r] < yr[r] - eps) {
        k = r;
        break;
      }
    }
    if (k == d) break;
    const double delta = std::min(z[j] - yr[j], yr[k] - z[k]);
    const double t = 1.0 - delta / (z[j] - z[k]);
    out.chain.push_back({ypos[j], ypos[k], std::clamp(t, 0.0, 1.0), d});
    z[j] -= delta;
    z[k] += delta;
  }
  return out;
}

}  // namespace trajopt
