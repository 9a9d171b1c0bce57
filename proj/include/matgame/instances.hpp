#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "matgame/core.hpp"
#include "matgame/l2l2.hpp"
#include "matgame/rng.hpp"
#include "matgame/svd.hpp"

namespace matgame {

// ---------------------------------------------------------------------------
// Instance families. Generation is deterministic given the seed (splitmix64
// into xoshiro256++, entries drawn in fixed row-major order), and the result
// is rescaled to satisfy the setup's normalization exactly.
// ---------------------------------------------------------------------------

enum class InstanceFamily { SignRandom, PlantedLowRank, DiagonalHard, SpectralDecay };

struct InstanceParams {
  int rank = 3;          // planted rank
  double noise = 0.0;    // eta for planted low rank
  double decay = 1.0;    // q for sigma_i ~ i^{-q}
};

inline const char* family_name(InstanceFamily f) {
  switch (f) {
    case InstanceFamily::SignRandom: return "sign_random";
    case InstanceFamily::PlantedLowRank: return "planted_low_rank";
    case InstanceFamily::DiagonalHard: return "diagonal_hard";
    case InstanceFamily::SpectralDecay: return "spectral_decay";
  }
  return "?";
}

inline InstanceFamily family_from_name(const std::string& s) {
  if (s == "sign_random") return InstanceFamily::SignRandom;
  if (s == "planted_low_rank") return InstanceFamily::PlantedLowRank;
  if (s == "diagonal_hard") return InstanceFamily::DiagonalHard;
  if (s == "spectral_decay") return InstanceFamily::SpectralDecay;
  throw ConfigError("unknown instance family: " + s);
}

namespace detail {

// Deterministic Gram-Schmidt columns of a Gaussian matrix.
inline std::vector<Vec> orthonormal_columns(int dim, int count, Xoshiro256pp& rng) {
  std::vector<Vec> cols;
  cols.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    for (const Vec& c : cols) axpy(v, -dot(c, v), c);
    const double r = norm2(v);
    if (r > 1e-12)
      for (double& e : v) e /= r;
    cols.push_back(std::move(v));
  }
  return cols;
}

inline void normalize_for_setup(DenseMatrix& a, SetupKind kind) {
  double norm = 0.0;
  switch (kind) {
    case SetupKind::L1L1: norm = a.max_abs(); break;
    case SetupKind::L2L1: norm = a.two_to_inf(); break;
    case SetupKind::L2L2: norm = spectral_norm(a); break;
  }
  if (norm > 0.0)
    for (double& v : a.data()) v /= norm;
}

}  // namespace detail

inline DenseMatrix generate_instance(InstanceFamily family, SetupKind kind, int m, int n,
                                     std::uint64_t seed, const InstanceParams& params = {}) {
  if (m < 1 || n < 1) throw ConfigError("generate_instance: dims must be >= 1");
  Xoshiro256pp rng(seed);
  DenseMatrix a(m, n);

  switch (family) {
    case InstanceFamily::SignRandom: {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.coin() ? 1.0 : -1.0;
      break;
    }
    case InstanceFamily::PlantedLowRank: {
      const int r = std::min({params.rank, m, n});
      auto us = detail::orthonormal_columns(m, r, rng);
      auto vs = detail::orthonormal_columns(n, r, rng);
      for (int k = 0; k < r; ++k)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) a(i, j) += us[k][i] * vs[k][j];
      if (params.noise > 0.0) {
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) a(i, j) += params.noise * rng.normal();
      }
      break;
    }
    case InstanceFamily::DiagonalHard: {
      for (int i = 0; i < std::min(m, n); ++i) a(i, i) = (i % 2 == 0) ? 1.0 : -1.0;
      break;
    }
    case InstanceFamily::SpectralDecay: {
      const int r = std::min(m, n);
      auto us = detail::orthonormal_columns(m, r, rng);
      auto vs = detail::orthonormal_columns(n, r, rng);
      for (int k = 0; k < r; ++k) {
        const double sigma = std::pow(static_cast<double>(k + 1), -params.decay);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) a(i, j) += sigma * us[k][i] * vs[k][j];
      }
      break;
    }
  }

  detail::normalize_for_setup(a, kind);
  return a;
}

// ---------------------------------------------------------------------------
// Exact gap by closed-form best responses against the dense matrix.
//   l1-l1:  max_i (Ax)_i - min_j (A^T y)_j
//   l2-l1:  max_i (Ax)_i + ||A^T y||_2
//   l2-l2:  composite gap (requires phi)
// ---------------------------------------------------------------------------

inline double certify_gap(const DenseMatrix& a, SetupKind kind, const GamePoint& z,
                          const CompositePhi* phi = nullptr) {
  const Vec ax = a.mul(z.x);
  const Vec aty = a.tmul(z.y);
  switch (kind) {
    case SetupKind::L1L1: {
      double best_y = -std::numeric_limits<double>::infinity();
      double best_x = std::numeric_limits<double>::infinity();
      for (double v : ax) best_y = std::max(best_y, v);
      for (double v : aty) best_x = std::min(best_x, v);
      return best_y - best_x;
    }
    case SetupKind::L2L1: {
      double best_y = -std::numeric_limits<double>::infinity();
      for (double v : ax) best_y = std::max(best_y, v);
      return best_y + norm2(aty);
    }
    case SetupKind::L2L2: {
      if (phi == nullptr) {
        CompositePhi zero = CompositePhi::zero(a.cols(), a.rows());
        return gap_l2l2(a, zero, z);
      }
      return gap_l2l2(a, *phi, z);
    }
  }
  return 0.0;
}

}  // namespace matgame
