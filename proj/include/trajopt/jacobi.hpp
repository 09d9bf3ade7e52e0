#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "trajopt/error.hpp"

namespace trajopt {

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Eigen::MatrixXd vectors;     // columns match `values`
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for a real symmetric matrix. Sweeps until the
/// off-diagonal Frobenius norm falls below tol * ||A||_F.
inline SymmetricEigen jacobi_eigen(Eigen::MatrixXd A, double tol = 1e-12, int max_sweeps = 100) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n) throw Error(ErrorCode::DimensionMismatch, "jacobi_eigen: matrix not square");
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(A.norm(), 1e-300);

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) s += A(i, j) * A(i, j);
    return std::sqrt(s);
  };

  SymmetricEigen out;
  for (; out.sweeps < max_sweeps && off_norm() > tol * scale; ++out.sweeps) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = V(k, p);
          const double vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index i, Eigen::Index j) { return A(i, i) > A(j, j); });
  out.vectors.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    out.values.push_back(A(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(r)]));
    out.vectors.col(r) = V.col(idx[static_cast<std::size_t>(r)]);
  }
  return out;
}

/// Eigenvalues (descending) of a complex Hermitian matrix H = X + iY, via the
/// real symmetric embedding [[X, -Y], [Y, X]] whose spectrum is that of H
/// with every eigenvalue doubled.
inline std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& H, double tol = 1e-12) {
  const Eigen::Index n = H.rows();
  Eigen::MatrixXd R(2 * n, 2 * n);
  R.topLeftCorner(n, n) = H.real();
  R.topRightCorner(n, n) = -H.imag();
  R.bottomLeftCorner(n, n) = H.imag();
  R.bottomRightCorner(n, n) = H.real();
  const auto eig = jacobi_eigen(R, tol);
  std::vector<double> out;
  for (std::size_t r = 0; r < eig.values.size(); r += 2) out.push_back(eig.values[r]);
  return out;
}

}  // namespace trajopt
