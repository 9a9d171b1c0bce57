#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "matgame/core.hpp"

namespace matgame {

// ---------------------------------------------------------------------------
// Bregman divergences (Table of setups: half squared distance on ball blocks,
// KL on simplex blocks). bregman(setup, from, to) = V_from(to).
// ---------------------------------------------------------------------------

namespace detail {

constexpr double kLogFloor = 1e-300;  // entropy centers clamped before logs

inline double kl_block(const Vec& to, const Vec& from) {
  double s = 0.0;
  for (std::size_t i = 0; i < to.size(); ++i) {
    if (from[i] <= 0.0) throw NonpositiveReference("bregman: reference simplex coordinate <= 0");
    if (to[i] > 0.0) s += to[i] * std::log(to[i] / from[i]);
    // 0 log 0 := 0
  }
  return std::max(s, 0.0);
}

inline double sqdist_block(const Vec& to, const Vec& from) {
  double s = 0.0;
  for (std::size_t i = 0; i < to.size(); ++i) {
    const double d = to[i] - from[i];
    s += d * d;
  }
  return 0.5 * s;
}

}  // namespace detail

inline double bregman_x(const GameSetup& setup, const Vec& from, const Vec& to) {
  return setup.x_is_simplex() ? detail::kl_block(to, from) : detail::sqdist_block(to, from);
}

inline double bregman_y(const GameSetup& setup, const Vec& from, const Vec& to) {
  return setup.y_is_simplex() ? detail::kl_block(to, from) : detail::sqdist_block(to, from);
}

inline double bregman(const GameSetup& setup, const GamePoint& from, const GamePoint& to) {
  return bregman_x(setup, from.x, to.x) + bregman_y(setup, from.y, to.y);
}

// Setup norm squared: ||z||^2 with l1 on simplex blocks, l2 on ball blocks.
inline double setup_norm_sq(const GameSetup& setup, const GamePoint& z) {
  const double nx = setup.x_is_simplex() ? norm1(z.x) : norm2(z.x);
  const double ny = setup.y_is_simplex() ? norm1(z.y) : norm2(z.y);
  return nx * nx + ny * ny;
}

// ---------------------------------------------------------------------------
// Multiplicative ball ("c-stable region"): simplex-block coordinates within a
// factor c of the center, and at least nu. Ball blocks are unconstrained.
// ---------------------------------------------------------------------------

struct MultiplicativeBall {
  GamePoint center;
  double factor = 1.0;  // c > 1
  double nu = 0.0;      // truncation floor

  bool contains(const GameSetup& setup, const GamePoint& z, double tol = 1e-12) const {
    auto block_ok = [&](const Vec& c, const Vec& v) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double lo = std::max(nu, c[i] / factor);
        const double hi = factor * c[i];
        if (v[i] < lo - tol || v[i] > hi + tol) return false;
      }
      return true;
    };
    if (setup.x_is_simplex() && !block_ok(center.x, z.x)) return false;
    if (setup.y_is_simplex() && !block_ok(center.y, z.y)) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Proximal-step kernels.
//
// The generic block problem, always a minimization:
//   argmin_u  theta^T u + sum_c w_c * V_{q_c}(u)   over the block domain,
// where the domain is the unit ball, or the truncated simplex intersected
// with box bounds [lo_i, hi_i] coming from a multiplicative ball.
//
// Ball block:    u = Proj_B( (sum_c w_c q_c - theta) / sum_c w_c )
// Simplex block: u_i = clamp(Lambda * rho_i, lo_i, hi_i) with
//   rho_i = exp( (sum_c w_c log q_c,i - theta_i) / sum_c w_c )
// and Lambda > 0 the unique normalizer with sum_i u_i = 1 (bisection).
// ---------------------------------------------------------------------------

struct WeightedCenter {
  const Vec* point;
  double weight;
};

namespace detail {

inline Vec prox_ball_block(const std::vector<WeightedCenter>& centers, const Vec& theta) {
  const std::size_t n = theta.size();
  double wsum = 0.0;
  Vec v(n, 0.0);
  for (const auto& c : centers) {
    if (c.weight == 0.0) continue;
    wsum += c.weight;
    axpy(v, c.weight, *c.point);
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = (v[i] - theta[i]) / wsum;
  const double r = norm2(v);
  if (r > 1.0) {
    for (double& e : v) e /= r;
  }
  return v;
}

struct SimplexBounds {
  Vec lo;  // elementwise lower bounds (>= 0)
  Vec hi;  // elementwise upper bounds (<= 1)
};

inline Vec prox_simplex_block(const std::vector<WeightedCenter>& centers, const Vec& theta,
                              const SimplexBounds* bounds) {
  const std::size_t n = theta.size();
  double wsum = 0.0;
  for (const auto& c : centers)
    if (c.weight != 0.0) wsum += c.weight;

  // log rho, then shift so max = 0 to avoid overflow in exp.
  Vec lrho(n, 0.0);
  for (const auto& c : centers) {
    if (c.weight == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      // centers are clamped before logs; solvers never feed exact zeros
      const double q = std::max((*c.point)[i], kLogFloor);
      lrho[i] += c.weight * std::log(q);
    }
  }
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    lrho[i] = (lrho[i] - theta[i]) / wsum;
    shift = std::max(shift, lrho[i]);
  }
  Vec rho(n);
  for (std::size_t i = 0; i < n; ++i) rho[i] = std::exp(lrho[i] - shift);

  if (bounds == nullptr) {
    // Untruncated simplex: exact normalization, no bisection.
    double s = 0.0;
    for (double r : rho) s += r;
    Vec u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = rho[i] / s;
    return u;
  }

  const Vec& lo = bounds->lo;
  const Vec& hi = bounds->hi;
  double lo_sum = 0.0, hi_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lo_sum += lo[i];
    hi_sum += hi[i];
    if (lo[i] > hi[i] + 1e-15) throw InfeasibleRestriction("prox: lo > hi on a coordinate");
  }
  if (lo_sum > 1.0 + 1e-12) throw InfeasibleRestriction("prox: sum of lower bounds > 1");
  if (hi_sum < 1.0 - 1e-12) throw InfeasibleRestriction("prox: sum of upper bounds < 1");

  auto mass = [&](double lambda) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::clamp(lambda * rho[i], lo[i], hi[i]);
    return s;
  };

  double rho_sum = 0.0;
  for (double r : rho) rho_sum += r;

  // Fast path: if the unconstrained normalizer lands inside all bounds it is
  // the exact solution and no bisection is needed.
  {
    bool inside = true;
    for (std::size_t i = 0; i < n && inside; ++i) {
      const double v = rho[i] / rho_sum;
      inside = (v >= lo[i] && v <= hi[i]);
    }
    if (inside) {
      Vec u(n);
      for (std::size_t i = 0; i < n; ++i) u[i] = rho[i] / rho_sum;
      return u;
    }
  }

  // Bracket, starting from the unconstrained normalizer, expanded geometrically.
  double llo = std::log(1.0 / rho_sum), lhi = llo;
  int guard = 0;
  while (mass(std::exp(llo)) > 1.0) {
    llo -= 0.6931471805599453;  // log 2
    if (++guard > 4000) throw NoBracket("prox: cannot bracket Lambda from below");
  }
  guard = 0;
  while (mass(std::exp(lhi)) < 1.0) {
    lhi += 0.6931471805599453;
    if (++guard > 4000) throw NoBracket("prox: cannot bracket Lambda from above");
  }

  // Bisection on log Lambda; the mass is monotone nondecreasing. Run to
  // interval-width convergence: a small mass defect alone can still leave the
  // free coordinates off when nearly all of the mass is clamped.
  double lmid = 0.5 * (llo + lhi);
  for (int it = 0; it < 200; ++it) {
    lmid = 0.5 * (llo + lhi);
    if ((lhi - llo) <= 1e-15 * std::max(1.0, std::fabs(lmid))) break;
    const double f = mass(std::exp(lmid)) - 1.0;
    if (f < 0.0)
      llo = lmid;
    else
      lhi = lmid;
  }
  const double lambda = std::exp(lmid);
  Vec u(n);
  double s = 0.0;
  bool any_clamped = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = lambda * rho[i];
    u[i] = std::clamp(raw, lo[i], hi[i]);
    any_clamped = any_clamped || (u[i] != raw);
    s += u[i];
  }
  if (!any_clamped) {
    for (double& e : u) e /= s;  // kill normalization drift exactly
  }
  return u;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public prox-step interface.
//
// ProxSpec.gradient is the linear term in the spec's sign-split convention:
// its x-part is minimized and its y-part is maximized. The optional second
// center (weight mu) realizes the two-center mappings used by the strongly
// monotone steps.
// ---------------------------------------------------------------------------

struct ProxSpec {
  GamePoint center_z;
  std::optional<GamePoint> center_w;
  double lambda = 1.0;
  double mu = 0.0;
  Vec gradient;  // length n + m
  std::optional<MultiplicativeBall> restriction;
};

namespace detail {

inline SimplexBounds make_bounds(const Vec& ball_center, double factor, double floor_nu,
                                 double setup_nu) {
  SimplexBounds b;
  const std::size_t n = ball_center.size();
  b.lo.resize(n);
  b.hi.resize(n);
  const double lo_floor = std::max(floor_nu, setup_nu);
  for (std::size_t i = 0; i < n; ++i) {
    b.lo[i] = std::max(lo_floor, ball_center[i] / factor);
    b.hi[i] = std::min(1.0, factor * ball_center[i]);
  }
  return b;
}

inline SimplexBounds make_plain_bounds(std::size_t n, double setup_nu) {
  SimplexBounds b;
  b.lo.assign(n, setup_nu);
  b.hi.assign(n, 1.0);
  return b;
}

// Shared blockwise driver. theta_* are minimized on both blocks (the y-block
// sign flip happens in the caller).
inline GamePoint prox_blocks(const GameSetup& setup,
                             const std::vector<WeightedCenter>& cx,
                             const std::vector<WeightedCenter>& cy, const Vec& theta_x,
                             const Vec& theta_y, const MultiplicativeBall* ball) {
  GamePoint out;
  if (setup.x_is_simplex()) {
    std::optional<SimplexBounds> b;
    if (ball != nullptr)
      b = make_bounds(ball->center.x, ball->factor, ball->nu, setup.nu);
    else if (setup.nu > 0.0)
      b = make_plain_bounds(theta_x.size(), setup.nu);
    out.x = prox_simplex_block(cx, theta_x, b ? &*b : nullptr);
  } else {
    out.x = prox_ball_block(cx, theta_x);
  }
  if (setup.y_is_simplex()) {
    std::optional<SimplexBounds> b;
    if (ball != nullptr)
      b = make_bounds(ball->center.y, ball->factor, ball->nu, setup.nu);
    else if (setup.nu > 0.0)
      b = make_plain_bounds(theta_y.size(), setup.nu);
    out.y = prox_simplex_block(cy, theta_y, b ? &*b : nullptr);
  } else {
    out.y = prox_ball_block(cy, theta_y);
  }
  return out;
}

}  // namespace detail

inline GamePoint prox_step(const GameSetup& setup, const ProxSpec& spec) {
  if (spec.lambda <= 0.0) throw ConfigError("prox_step: lambda must be positive");
  if (spec.mu < 0.0) throw ConfigError("prox_step: mu must be nonnegative");
  if (spec.mu > 0.0 && !spec.center_w) throw ConfigError("prox_step: mu > 0 without second center");
  if (static_cast<int>(spec.gradient.size()) != setup.n + setup.m)
    throw DimensionMismatch("prox_step: gradient length");

  std::vector<WeightedCenter> cx, cy;
  cx.push_back({&spec.center_z.x, spec.lambda});
  cy.push_back({&spec.center_z.y, spec.lambda});
  if (spec.mu > 0.0) {
    cx.push_back({&spec.center_w->x, spec.mu});
    cy.push_back({&spec.center_w->y, spec.mu});
  }
  Vec tx(spec.gradient.begin(), spec.gradient.begin() + setup.n);
  Vec ty(setup.m);
  for (int i = 0; i < setup.m; ++i) ty[i] = -spec.gradient[setup.n + i];  // y maximized
  return detail::prox_blocks(setup, cx, cy, tx, ty,
                             spec.restriction ? &*spec.restriction : nullptr);
}

// Checks the variational inequality of the proximal mapping definition at the
// sampled probe points: with v the signed linear operator,
//   v^T (z' - u) <= lambda [V_z(u) - V_z'(u) - V_z(z')]
//                 + mu     [V_w(u) - V_z'(u) - V_w(z')] + tol.
inline bool verify_prox_vi(const GameSetup& setup, const ProxSpec& spec,
                           const GamePoint& candidate, const std::vector<GamePoint>& probes,
                           double tol) {
  Vec vx(spec.gradient.begin(), spec.gradient.begin() + setup.n);
  Vec vy(setup.m);
  for (int i = 0; i < setup.m; ++i) vy[i] = -spec.gradient[setup.n + i];
  const double vz = dot(vx, candidate.x) + dot(vy, candidate.y);
  for (const auto& u : probes) {
    const double vu = dot(vx, u.x) + dot(vy, u.y);
    double rhs = spec.lambda * (bregman(setup, spec.center_z, u) - bregman(setup, candidate, u) -
                                bregman(setup, spec.center_z, candidate));
    if (spec.mu > 0.0)
      rhs += spec.mu * (bregman(setup, *spec.center_w, u) - bregman(setup, candidate, u) -
                        bregman(setup, *spec.center_w, candidate));
    if (vz - vu > rhs + tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// q_c: the local-norm comparison constant,
//   q_c = c^2 * max( I(c^4)^{-1}, I(1/c^4) ),  I(C) = int_0^1 (1-t)/(1-t+tC) dt,
// with the closed form I(C) = (C log C - (C-1)) / (C-1)^2 and I(1) = 1/2.
// ---------------------------------------------------------------------------

inline double qc_integral_closed_form(double C) {
  const double e = C - 1.0;
  if (std::fabs(e) < 1e-3) {
    // series of (C log C - (C-1))/(C-1)^2 about C = 1
    double sum = 0.5, p = 1.0;
    for (int k = 1; k <= 8; ++k) {
      p *= -e;
      sum += p / ((k + 1.0) * (k + 2.0));
    }
    return sum;
  }
  return (C * std::log(C) - e) / (e * e);
}

inline double qc_constant(double c) {
  if (c < 1.0) throw ConfigError("qc_constant: c must be >= 1");
  const double c4 = c * c * c * c;
  const double lo = qc_integral_closed_form(c4);        // <= 1/2
  const double hi = qc_integral_closed_form(1.0 / c4);  // >= 1/2
  return c * c * std::max(1.0 / lo, hi);
}

// ---------------------------------------------------------------------------
// Local-norm rescalings (grounding substrate): simplex-block coordinates are
// divided by sqrt of the norm point, ball blocks are untouched.
// ---------------------------------------------------------------------------

namespace detail {
inline Vec scale_by_inv_sqrt(const Vec& v, const Vec& np) {
  Vec r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (np[i] <= 0.0) throw NonpositiveNormPoint("localize: norm point coordinate <= 0");
    r[i] = v[i] / std::sqrt(np[i]);
  }
  return r;
}
inline Vec scale_by_sqrt(const Vec& v, const Vec& np) {
  Vec r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (np[i] <= 0.0) throw NonpositiveNormPoint("unlocalize: norm point coordinate <= 0");
    r[i] = v[i] * std::sqrt(np[i]);
  }
  return r;
}
}  // namespace detail

inline GamePoint localize(const GameSetup& setup, const GamePoint& point,
                          const GamePoint& norm_point) {
  GamePoint r;
  r.x = setup.x_is_simplex() ? detail::scale_by_inv_sqrt(point.x, norm_point.x) : point.x;
  r.y = setup.y_is_simplex() ? detail::scale_by_inv_sqrt(point.y, norm_point.y) : point.y;
  return r;
}

inline GamePoint unlocalize(const GameSetup& setup, const GamePoint& point,
                            const GamePoint& norm_point) {
  GamePoint r;
  r.x = setup.x_is_simplex() ? detail::scale_by_sqrt(point.x, norm_point.x) : point.x;
  r.y = setup.y_is_simplex() ? detail::scale_by_sqrt(point.y, norm_point.y) : point.y;
  return r;
}

// ---------------------------------------------------------------------------
// Truncation level: nu = min{eps, 1} / (8 max{m, n}).
// ---------------------------------------------------------------------------

inline double truncation_level(const GameSetup& setup, double epsilon) {
  if (epsilon <= 0.0) throw ConfigError("truncation_level: epsilon must be positive");
  return std::min(epsilon, 1.0) / (8.0 * std::max(setup.m, setup.n));
}

// Bregman projection onto a ball-restricted domain (prox with zero gradient).
inline GamePoint nearest_in_ball(const GameSetup& setup, const GamePoint& from,
                                 const MultiplicativeBall& ball) {
  ProxSpec spec;
  spec.center_z = from;
  spec.lambda = 1.0;
  spec.gradient.assign(setup.n + setup.m, 0.0);
  spec.restriction = ball;
  return prox_step(setup, spec);
}

}  // namespace matgame
