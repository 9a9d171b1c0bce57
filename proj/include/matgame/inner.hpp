#pragma once

#include <cmath>
#include <vector>

#include "matgame/core.hpp"
#include "matgame/geometry.hpp"

namespace matgame {

// ---------------------------------------------------------------------------
// Exact solve of prox steps whose operator contains an explicit bilinear term
// evaluated at the prox argument (an implicit prox). The problem is
//
//   find w:  (v + S(w))^T (w - u) <= sum_c lambda_c [ V_{q_c}(u) - V_w(u) - V_{q_c}(w) ]
//
// for all u in the restricted domain, where v is a fixed signed vector and
// S(w) = (C^T w_y, -C w_x) for an explicitly known matrix C (no oracle cost).
//
// Solved by strongly monotone extragradient with the same two-prox structure
// as the oracle-driven steps: the regularizer centers are folded into the
// first prox, and the second prox anchors the strongly monotone part at the
// midpoint. Contracts at rate (1 + W/eta)^{-1} once eta dominates the
// Lipschitz constant of S, so the iterate reaches fp resolution in
// O((1 + eta/W) log(1/eps_mach)) explicit multiplies and zero oracle queries.
// ---------------------------------------------------------------------------

struct BlockCenters {
  // weighted centers per block; weights may differ between blocks (quadratic
  // composite terms fold in as origin-centers with their own weights)
  std::vector<std::pair<Vec, double>> x;
  std::vector<std::pair<Vec, double>> y;

  double weight_x() const {
    double s = 0.0;
    for (const auto& c : x) s += c.second;
    return s;
  }
  double weight_y() const {
    double s = 0.0;
    for (const auto& c : y) s += c.second;
    return s;
  }
};

namespace detail {

inline GamePoint multi_center_prox(const GameSetup& setup,
                                   const std::vector<WeightedCenter>& cx,
                                   const std::vector<WeightedCenter>& cy,
                                   const Vec& theta_x_signed, const Vec& theta_y_signed,
                                   const MultiplicativeBall* ball) {
  // signed y slot is minimized as-is (the sign flip is already inside it)
  return prox_blocks(setup, cx, cy, theta_x_signed, theta_y_signed, ball);
}

// d/du of the block dgf: log(u) + 1 for entropy, u for half squared l2.
inline void add_dgf_gradient_diff(bool simplex, double weight, const Vec& at, const Vec& center,
                                  Vec& theta) {
  if (weight == 0.0) return;
  for (std::size_t i = 0; i < at.size(); ++i) {
    if (simplex) {
      const double a = std::max(at[i], kLogFloor);
      const double c = std::max(center[i], kLogFloor);
      theta[i] += weight * std::log(a / c);
    } else {
      theta[i] += weight * (at[i] - center[i]);
    }
  }
}

}  // namespace detail

// Skew must provide mul(x) -> m-vec and tmul(y) -> n-vec.
template <typename Skew>
GamePoint solve_implicit_prox(const GameSetup& setup, const BlockCenters& centers,
                              const Vec& vx, const Vec& vy, const Skew* skew,
                              double skew_lipschitz_bound, const MultiplicativeBall* ball,
                              const GamePoint& start, int max_iters = 20000) {
  std::vector<WeightedCenter> reg_x, reg_y;
  for (const auto& c : centers.x)
    if (c.second != 0.0) reg_x.push_back({&c.first, c.second});
  for (const auto& c : centers.y)
    if (c.second != 0.0) reg_y.push_back({&c.first, c.second});

  if (skew == nullptr || skew_lipschitz_bound <= 0.0) {
    return detail::multi_center_prox(setup, reg_x, reg_y, vx, vy, ball);
  }

  const double wx = centers.weight_x(), wy = centers.weight_y();
  const double w_total = std::min(wx, wy);
  const double eta = std::max(skew_lipschitz_bound, 1e-12);

  auto skew_theta = [&](const GamePoint& p, Vec& tx, Vec& ty) {
    const Vec cx = skew->tmul(p.y);  // C^T p_y
    const Vec cy = skew->mul(p.x);   // C p_x
    tx = vx;
    ty = vy;
    for (std::size_t j = 0; j < tx.size(); ++j) tx[j] += cx[j];
    for (std::size_t i = 0; i < ty.size(); ++i) ty[i] -= cy[i];
  };

  const double rate = std::log1p(w_total / eta);
  int iters = static_cast<int>(std::ceil(60.0 / std::max(rate, 1e-9)));
  iters = std::min(std::max(iters, 8), max_iters);

  GamePoint cur = start;
  Vec tx, ty;
  for (int t = 0; t < iters; ++t) {
    // first prox: skew at the anchor, regularizer centers handled exactly
    std::vector<WeightedCenter> cx1 = reg_x, cy1 = reg_y;
    cx1.push_back({&cur.x, eta});
    cy1.push_back({&cur.y, eta});
    skew_theta(cur, tx, ty);
    GamePoint mid = detail::multi_center_prox(setup, cx1, cy1, tx, ty, ball);

    // second prox: skew and regularizer gradients at the midpoint, anchored
    // at (cur: eta) and (mid: block regularizer weight)
    skew_theta(mid, tx, ty);
    for (const auto& c : centers.x)
      detail::add_dgf_gradient_diff(setup.x_is_simplex(), c.second, mid.x, c.first, tx);
    for (const auto& c : centers.y)
      detail::add_dgf_gradient_diff(setup.y_is_simplex(), c.second, mid.y, c.first, ty);
    std::vector<WeightedCenter> cx2, cy2;
    cx2.push_back({&cur.x, eta});
    cy2.push_back({&cur.y, eta});
    if (wx > 0.0) cx2.push_back({&mid.x, wx});
    if (wy > 0.0) cy2.push_back({&mid.y, wy});
    GamePoint next = detail::multi_center_prox(setup, cx2, cy2, tx, ty, ball);

    double move = 0.0;
    for (int j = 0; j < setup.n; ++j) move = std::max(move, std::fabs(next.x[j] - cur.x[j]));
    for (int i = 0; i < setup.m; ++i) move = std::max(move, std::fabs(next.y[i] - cur.y[i]));
    cur = std::move(next);
    if (move <= 1e-15) break;
  }
  return cur;
}

}  // namespace matgame
