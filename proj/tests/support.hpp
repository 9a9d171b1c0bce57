#pragma once

// Test-side reference oracles, independent of the implementation paths they
// check: a projected-gradient prox reference, adaptive Simpson quadrature,
// a plain extragradient solver for regularized saddle points on explicit
// dense matrices, and random domain samplers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "matgame.hpp"

namespace testref {

using matgame::DenseMatrix;
using matgame::GamePoint;
using matgame::GameSetup;
using matgame::MultiplicativeBall;
using matgame::Vec;
using matgame::Xoshiro256pp;

// ---------------------------------------------------------------------------
// Euclidean projection onto { u in simplex : lo <= u <= hi } via bisection on
// the shift dual variable. (A different composition than the solver's
// multiplicative clamp, so it is a genuinely independent route.)
// ---------------------------------------------------------------------------

inline Vec project_box_simplex(const Vec& v, const Vec& lo, const Vec& hi) {
  auto mass = [&](double shift) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += std::clamp(v[i] - shift, lo[i], hi[i]);
    return s;
  };
  double a = -2.0, b = 2.0;
  for (double va : v) {
    a = std::min(a, va - 2.0);
    b = std::max(b, va + 2.0);
  }
  while (mass(a) < 1.0) a -= 1.0;
  while (mass(b) > 1.0) b += 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (mass(mid) > 1.0)
      a = mid;
    else
      b = mid;
  }
  const double shift = 0.5 * (a + b);
  Vec u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) u[i] = std::clamp(v[i] - shift, lo[i], hi[i]);
  return u;
}

inline Vec project_unit_ball(const Vec& v) {
  const double r = matgame::norm2(v);
  if (r <= 1.0) return v;
  return matgame::scaled(v, 1.0 / r);
}

// ---------------------------------------------------------------------------
// Projected-gradient reference for one prox block:
//   minimize theta^T u + sum_c w_c V_{q_c}(u) over the block domain.
// Runs to a fixed-point residual of ~1e-13 in the projected step map.
// ---------------------------------------------------------------------------

struct BlockProblem {
  bool simplex = false;
  Vec theta;
  std::vector<std::pair<Vec, double>> centers;
  Vec lo, hi;  // simplex bounds (ignored for ball blocks)
};

inline Vec pg_reference_block(const BlockProblem& prob, int max_iters = 400000) {
  const std::size_t n = prob.theta.size();
  double wsum = 0.0;
  for (const auto& c : prob.centers) wsum += c.second;

  Vec u(n);
  if (prob.simplex) {
    auto objective = [&](const Vec& w) {
      double f = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        f += prob.theta[i] * w[i];
        for (const auto& c : prob.centers) {
          const double wi = std::max(w[i], 1e-300);
          const double qi = std::max(c.first[i], 1e-300);
          f += c.second * (wi * std::log(wi / qi) - wi + qi);
        }
      }
      return f;
    };
    auto gradient = [&](const Vec& w, Vec& g) {
      for (std::size_t i = 0; i < n; ++i) {
        double gi = prob.theta[i];
        for (const auto& c : prob.centers)
          gi += c.second *
                std::log(std::max(w[i], 1e-300) / std::max(c.first[i], 1e-300));
        g[i] = gi;
      }
    };
    // projected gradient with Armijo backtracking; the global Lipschitz
    // constant near nu is useless, the local one is what matters
    Vec mid(n);
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (prob.lo[i] + prob.hi[i]);
    u = project_box_simplex(mid, prob.lo, prob.hi);
    const double probe = 1.0 / wsum;
    double step = probe;
    Vec g(n), v(n);
    double fu = objective(u);
    for (int it = 0; it < max_iters; ++it) {
      gradient(u, g);

      // stationarity at a fixed probe step, immune to step-size drift
      double resid = 0.0;
      for (std::size_t i = 0; i < n; ++i) v[i] = u[i] - probe * g[i];
      const Vec probe_pt = project_box_simplex(v, prob.lo, prob.hi);
      for (std::size_t i = 0; i < n; ++i)
        resid = std::max(resid, std::fabs(probe_pt[i] - u[i]));
      if (resid <= 1e-13 && it > 2) break;

      Vec next;
      double fnext = 0.0;
      for (int bt = 0; bt < 80; ++bt) {
        for (std::size_t i = 0; i < n; ++i) v[i] = u[i] - step * g[i];
        next = project_box_simplex(v, prob.lo, prob.hi);
        fnext = objective(next);
        double lin = 0.0, quad = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = next[i] - u[i];
          lin += g[i] * d;
          quad += d * d;
        }
        // slack absorbs objective rounding noise near the optimum
        if (fnext <= fu + lin + quad / (2.0 * step) + 5e-15 * (1.0 + std::fabs(fu))) break;
        step *= 0.5;
      }
      u = next;
      fu = fnext;
      step = std::min(step * 1.3, 64.0 / wsum);
    }
  } else {
    const double step = 1.0 / wsum;
    u.assign(n, 0.0);
    Vec g(n);
    for (int it = 0; it < max_iters; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        double gi = prob.theta[i];
        for (const auto& c : prob.centers) gi += c.second * (u[i] - c.first[i]);
        g[i] = gi;
      }
      Vec v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = u[i] - step * g[i];
      Vec next = project_unit_ball(v);
      double move = 0.0;
      for (std::size_t i = 0; i < n; ++i) move = std::max(move, std::fabs(next[i] - u[i]));
      u = next;
      if (move <= 1e-15) break;
    }
  }
  return u;
}

// Full-point reference for a ProxSpec (splits into independent blocks).
inline GamePoint pg_reference_prox(const GameSetup& setup, const matgame::ProxSpec& spec) {
  auto block = [&](bool is_x) {
    BlockProblem prob;
    prob.simplex = is_x ? setup.x_is_simplex() : setup.y_is_simplex();
    const int len = is_x ? setup.n : setup.m;
    prob.theta.resize(len);
    for (int i = 0; i < len; ++i) {
      const double g = spec.gradient[is_x ? i : setup.n + i];
      prob.theta[i] = is_x ? g : -g;  // y block maximizes
    }
    prob.centers.emplace_back(is_x ? spec.center_z.x : spec.center_z.y, spec.lambda);
    if (spec.mu > 0.0) prob.centers.emplace_back(is_x ? spec.center_w->x : spec.center_w->y, spec.mu);
    if (prob.simplex) {
      prob.lo.assign(len, setup.nu);
      prob.hi.assign(len, 1.0);
      if (spec.restriction) {
        const Vec& c = is_x ? spec.restriction->center.x : spec.restriction->center.y;
        for (int i = 0; i < len; ++i) {
          prob.lo[i] = std::max({setup.nu, spec.restriction->nu, c[i] / spec.restriction->factor});
          prob.hi[i] = std::min(1.0, spec.restriction->factor * c[i]);
        }
      }
    }
    return pg_reference_block(prob);
  };
  GamePoint out;
  out.x = block(true);
  out.y = block(false);
  return out;
}

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature.
// ---------------------------------------------------------------------------

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 60) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// Quadrature of the local-norm integral. The integrand has a boundary layer
// of width ~ min(C, 1/C), so integrate over geometrically refined pieces with
// per-piece tolerances proportional to the piece's own magnitude; this keeps
// the total error relative even when the integral itself is ~ log(C)/C.
inline double qc_integral_quadrature(double C) {
  if (C == 1.0) return 0.5;
  auto f = [C](double t) { return (1.0 - t) / (1.0 - t + t * C); };
  auto piece = [&](double a, double b) {
    const double rough =
        (b - a) * (std::fabs(f(a)) + std::fabs(f(0.5 * (a + b))) + std::fabs(f(b))) / 3.0;
    return adaptive_simpson(f, a, b, std::max(rough, 1e-280) * 1e-12);
  };
  double total = 0.0;
  if (C > 1.0) {
    // layer near t = 0 scale 1/C: halve toward 0
    double hi = 1.0;
    const double floor_width = std::min(0.25, 1.0 / (64.0 * C));
    while (hi > floor_width) {
      total += piece(hi * 0.5, hi);
      hi *= 0.5;
    }
    total += piece(0.0, hi);
  } else {
    // layer near t = 1 scale C: halve toward 1
    double width = 1.0;
    const double floor_width = std::min(0.25, C / 64.0);
    double lo = 0.0;
    while (width > floor_width) {
      total += piece(lo, 1.0 - width * 0.5);
      lo = 1.0 - width * 0.5;
      width *= 0.5;
    }
    total += piece(lo, 1.0);
  }
  return total;
}

inline double qc_quadrature(double c) {
  const double c4 = c * c * c * c;
  const double lo = qc_integral_quadrature(c4);
  const double hi = qc_integral_quadrature(1.0 / c4);
  return c * c * std::max(1.0 / lo, hi);
}

// ---------------------------------------------------------------------------
// High-accuracy reference for regularized saddle points with explicit dense
// A: plain strongly monotone extragradient (no judges, models, or oracles),
//   z* = prox^alpha_{z_c}( grad_pm f_A ; restriction or truncated domain ).
// ---------------------------------------------------------------------------

inline GamePoint reference_prox(const GameSetup& setup, const DenseMatrix& a,
                                const GamePoint& z_c, double alpha,
                                const MultiplicativeBall* ball = nullptr,
                                double target = 1e-15) {
  const double lambda = std::max(1.0, a.max_abs());
  const long long iters = std::max<long long>(
      64, static_cast<long long>(std::ceil((1.0 + lambda / alpha) *
                                           std::log(std::max(setup.gamma(), 2.0) / target))));

  auto signed_grad = [&](const GamePoint& p, Vec& gx, Vec& gy) {
    gx = a.tmul(p.y);
    gy = matgame::scaled(a.mul(p.x), -1.0);
  };

  GamePoint u = z_c;
  Vec gx, gy;
  for (long long t = 0; t < iters; ++t) {
    std::vector<matgame::WeightedCenter> cx1{{&u.x, lambda}, {&z_c.x, alpha}};
    std::vector<matgame::WeightedCenter> cy1{{&u.y, lambda}, {&z_c.y, alpha}};
    signed_grad(u, gx, gy);
    GamePoint mid = matgame::detail::prox_blocks(setup, cx1, cy1, gx, gy, ball);

    signed_grad(mid, gx, gy);
    matgame::detail::add_dgf_gradient_diff(setup.x_is_simplex(), alpha, mid.x, z_c.x, gx);
    matgame::detail::add_dgf_gradient_diff(setup.y_is_simplex(), alpha, mid.y, z_c.y, gy);
    std::vector<matgame::WeightedCenter> cx2{{&u.x, lambda}, {&mid.x, alpha}};
    std::vector<matgame::WeightedCenter> cy2{{&u.y, lambda}, {&mid.y, alpha}};
    GamePoint next = matgame::detail::prox_blocks(setup, cx2, cy2, gx, gy, ball);

    double move = 0.0;
    for (int j = 0; j < setup.n; ++j) move = std::max(move, std::fabs(next.x[j] - u.x[j]));
    for (int i = 0; i < setup.m; ++i) move = std::max(move, std::fabs(next.y[i] - u.y[i]));
    u = next;
    if (move <= 1e-16) break;
  }
  return u;
}

// ---------------------------------------------------------------------------
// Random samplers.
// ---------------------------------------------------------------------------

inline Vec random_simplex_point(int n, Xoshiro256pp& rng, double nu = 0.0) {
  Vec v(n);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = -std::log(rng.uniform_open());
    s += v[i];
  }
  for (double& e : v) e /= s;
  if (nu > 0.0) {
    // mix toward uniform so every coordinate clears the floor
    const double w = std::min(1.0, 2.0 * nu * n);
    for (int i = 0; i < n; ++i) v[i] = (1.0 - w) * v[i] + w / n;
  }
  return v;
}

inline Vec random_ball_point(int n, Xoshiro256pp& rng, double radius = 1.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  const double r = matgame::norm2(v);
  const double target = radius * std::pow(rng.uniform_open(), 1.0 / n);
  if (r > 0.0)
    for (double& e : v) e *= target / r;
  return v;
}

inline GamePoint random_domain_point(const GameSetup& setup, Xoshiro256pp& rng,
                                     double interior_nu = 0.0) {
  GamePoint z;
  z.x = setup.x_is_simplex() ? random_simplex_point(setup.n, rng, interior_nu)
                             : random_ball_point(setup.n, rng);
  z.y = setup.y_is_simplex() ? random_simplex_point(setup.m, rng, interior_nu)
                             : random_ball_point(setup.m, rng);
  return z;
}

inline DenseMatrix random_dense(int m, int n, Xoshiro256pp& rng, double scale = 1.0) {
  DenseMatrix a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * rng.uniform(-1.0, 1.0);
  return a;
}

// Dense matrix from judge update factors.
inline DenseMatrix factors_dense(const std::vector<matgame::RankOneFactor>& fs, int m, int n) {
  DenseMatrix d(m, n);
  for (const auto& f : fs)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) d(i, j) += f.scale * f.v[i] * f.u[j];
  return d;
}

}  // namespace testref
