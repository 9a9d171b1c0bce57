#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "matgame/core.hpp"

namespace matgame {

// One-sided Jacobi SVD: repeatedly orthogonalize pairs of columns until all
// pairwise inner products are negligible; singular values are then the column
// norms. Used for Schatten norms in tests, parameter selection, and the
// benchmark CLI. Solvers never call this.
inline Vec singular_values(const DenseMatrix& a_in) {
  // Work with the tall orientation so sweeps touch fewer columns.
  DenseMatrix a = a_in.rows() >= a_in.cols() ? a_in : a_in.transposed();
  const int m = a.rows(), n = a.cols();

  auto col_dot = [&](int p, int q) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += a(i, p) * a(i, q);
    return s;
  };

  const double eps = 1e-15;
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool converged = true;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double app = col_dot(p, p);
        const double aqq = col_dot(q, q);
        const double apq = col_dot(p, q);
        if (std::fabs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
        converged = false;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < m; ++i) {
          const double vp = a(i, p), vq = a(i, q);
          a(i, p) = c * vp - s * vq;
          a(i, q) = s * vp + c * vq;
        }
      }
    }
    if (converged) break;
  }

  Vec sigma(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += a(i, j) * a(i, j);
    sigma[j] = std::sqrt(s);
  }
  std::sort(sigma.begin(), sigma.end(), std::greater<double>());
  return sigma;
}

inline double schatten_norm(const DenseMatrix& a, double p) {
  const Vec sigma = singular_values(a);
  if (std::isinf(p)) return sigma.empty() ? 0.0 : sigma.front();
  double s = 0.0;
  for (double v : sigma) s += std::pow(v, p);
  return std::pow(s, 1.0 / p);
}

inline double spectral_norm(const DenseMatrix& a) {
  const Vec sigma = singular_values(a);
  return sigma.empty() ? 0.0 : sigma.front();
}

}  // namespace matgame
