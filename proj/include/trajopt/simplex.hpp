#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "trajopt/error.hpp"

namespace trajopt::lp {

/// Dense equality-form LP:  maximize c.x  subject to  A x = b,  x >= 0.
/// A is row-major with rows() == b.size() and cols() == c.size().
struct Problem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> A;
  std::vector<double> b;
  std::vector<double> c;

  double& at(std::size_t r, std::size_t k) { return A[r * cols + k]; }
};

struct Solution {
  double objective = 0.0;
  std::vector<double> x;
};

namespace detail {

inline constexpr double kPivotTol = 1e-9;

// Tableau with an objective row stored last. Column `width - 1` is the rhs.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), width_(cols + 1), data_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t r, std::size_t k) { return data_[r * width_ + k]; }
  double at(std::size_t r, std::size_t k) const { return data_[r * width_ + k]; }
  double& rhs(std::size_t r) { return at(r, width_ - 1); }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return width_ - 1; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / at(pr, pc);
    for (std::size_t k = 0; k < width_; ++k) at(pr, k) *= inv;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < width_; ++k) at(r, k) -= f * at(pr, k);
    }
  }

  void drop_row(std::size_t r) {
    data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(r * width_),
                data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * width_));
    --rows_;
  }

 private:
  std::size_t rows_;
  std::size_t width_;
  std::vector<double> data_;
};

// Objective row holds reduced costs z_j - c_j; an entering column has a
// negative entry. Bland's rule keeps the method cycle-free.
inline bool run_simplex(Tableau& t, std::vector<std::size_t>& basis,
                        std::size_t usable_cols, double tol) {
  const std::size_t obj = t.rows();
  for (std::size_t iter = 0; iter < 100000; ++iter) {
    std::size_t enter = usable_cols;
    for (std::size_t k = 0; k < usable_cols; ++k) {
      if (t.at(obj, k) < -tol) {
        enter = k;
        break;
      }
    }
    if (enter == usable_cols) return true;
    // Minimum ratio, near-ties broken by Bland's rule. Tiny pivot entries are
    // ignored: they come from cancellation and would amplify rounding.
    std::size_t leave = t.rows();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < t.rows(); ++r) {
      const double coef = t.at(r, enter);
      if (coef > kPivotTol) {
        const double ratio = std::max(t.rhs(r), 0.0) / coef;
        if (ratio < best - tol ||
            (ratio <= best + tol && leave < t.rows() &&
             basis[r] < basis[leave])) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
    }
    if (leave == t.rows()) return false;  // unbounded
    t.pivot(leave, enter);
    basis[leave] = enter;
  }
  return false;
}

}  // namespace detail

/// Two-phase tableau simplex. Returns nullopt when the problem is infeasible
/// or unbounded. Intended for the small desk-scale oracle problems only.
inline std::optional<Solution> maximize(Problem prob, double tol = 1e-10) {
  const std::size_t m = prob.rows;
  const std::size_t n = prob.cols;
  if (prob.A.size() != m * n || prob.b.size() != m || prob.c.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "lp::maximize: inconsistent sizes");
  }
  for (std::size_t r = 0; r < m; ++r) {
    if (prob.b[r] < 0.0) {
      prob.b[r] = -prob.b[r];
      for (std::size_t k = 0; k < n; ++k) prob.at(r, k) = -prob.at(r, k);
    }
  }

  // Phase 1: artificials n..n+m-1, minimize their sum.
  detail::Tableau t(m, n + m);
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t k = 0; k < n; ++k) t.at(r, k) = prob.A[r * n + k];
    t.at(r, n + r) = 1.0;
    t.rhs(r) = prob.b[r];
    basis[r] = n + r;
  }
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += t.at(r, k);
    t.at(m, k) = -s;
  }
  {
    double s = 0.0;
    for (std::size_t r = 0; r < m; ++r) s += t.rhs(r);
    t.rhs(m) = -s;
  }
  if (!detail::run_simplex(t, basis, n + m, tol)) return std::nullopt;
  if (t.rhs(t.rows()) < -1e3 * tol) return std::nullopt;

  // Drive artificials out of the basis; rows that cannot be pivoted are
  // redundant equalities.
  for (std::size_t r = 0; r < t.rows();) {
    if (basis[r] < n) {
      ++r;
      continue;
    }
    // largest available entry, so a near-zero pivot cannot blow up the tableau
    std::size_t col = n;
    double mag = 1e-7;
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(t.at(r, k)) > mag) {
        mag = std::abs(t.at(r, k));
        col = k;
      }
    }
    if (col == n) {
      t.drop_row(r);
      basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(r));
      continue;
    }
    t.pivot(r, col);
    basis[r] = col;
    ++r;
  }

  // Phase 2 objective: reduced costs for maximize c.x.
  const std::size_t obj = t.rows();
  for (std::size_t k = 0; k < n + m; ++k) t.at(obj, k) = 0.0;
  t.rhs(obj) = 0.0;
  for (std::size_t k = 0; k < n; ++k) t.at(obj, k) = -prob.c[k];
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const double cb = prob.c[basis[r]];
    if (cb == 0.0) continue;
    for (std::size_t k = 0; k < n + m; ++k) t.at(obj, k) += cb * t.at(r, k);
    t.rhs(obj) += cb * t.rhs(r);
  }
  if (!detail::run_simplex(t, basis, n, tol)) return std::nullopt;

  Solution sol;
  sol.x.assign(n, 0.0);
  for (std::size_t r = 0; r < t.rows(); ++r) sol.x[basis[r]] = t.rhs(r);
  sol.objective = 0.0;
  for (std::size_t k = 0; k < n; ++k) sol.objective += prob.c[k] * sol.x[k];
  return sol;
}

}  // namespace trajopt::lp
