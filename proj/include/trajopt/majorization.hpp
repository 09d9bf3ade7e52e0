#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "trajopt/error.hpp"

namespace trajopt {

/// True iff x majorizes y: every partial sum of x sorted descending is at
/// least the matching partial sum of y, and the totals agree (all within eps).
inline bool majorizes(std::span<const double> x, std::span<const double> y,
                      double eps = 1e-12) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "majorizes: lengths differ");
  }
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end(), std::greater<>());
  std::sort(ys.begin(), ys.end(), std::greater<>());
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    if (sx < sy - eps) return false;
  }
  return std::abs(sx - sy) <= eps;
}

}  // namespace trajopt
