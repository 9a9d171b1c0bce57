#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "matgame/core.hpp"
#include "matgame/geometry.hpp"
#include "matgame/inner.hpp"
#include "matgame/judges.hpp"
#include "matgame/oracle.hpp"

namespace matgame {

// ---------------------------------------------------------------------------
// Composite part phi(x, y) = b^T x - c^T y + (mu_x/2)||x||^2 - (mu_y/2)||y||^2.
// Convex in x and concave in y whenever mu_x, mu_y >= 0; this is the shipped
// instantiation (the solver only ever needs gradient/prox access to phi, and
// here both are closed-form: the quadratic parts fold into origin-centers).
// ---------------------------------------------------------------------------

struct CompositePhi {
  Vec b;  // length n
  Vec c;  // length m
  double mu_x = 0.0;
  double mu_y = 0.0;

  static CompositePhi zero(int n, int m) { return CompositePhi{Vec(n, 0.0), Vec(m, 0.0), 0.0, 0.0}; }

  double value(const GamePoint& z) const {
    return dot(b, z.x) - dot(c, z.y) + 0.5 * mu_x * dot(z.x, z.x) - 0.5 * mu_y * dot(z.y, z.y);
  }
};

struct StepResult {
  GamePoint w;
  GamePoint z_next;
  JudgeVerdict verdict;
};

// One smooth-until-guilty mirror prox step for f_B + psi, psi = phi + f_M.
// Costs 2 oracle queries plus at most 2 inside the judge. The first prox is
// implicit in psi: the quadratic parts enter as origin centers and the model
// part through the explicit inner solve.
inline StepResult sugm_step(const GameSetup& setup, const GamePoint& z, double tau,
                            const MatVecSource& b_view, const CompositePhi& phi,
                            const Model& model, JudgeKind judge) {
  const int n = setup.n, m = setup.m;
  StepResult res;

  auto [bzx, btzy] = b_view.matvec_pair(z.x, z.y);
  // signed operator value of f_B at z: (B^T z_y, -B z_x)
  Vec vx = btzy, vy = scaled(bzx, -1.0);
  for (int j = 0; j < n; ++j) vx[j] += phi.b[j];
  for (int i = 0; i < m; ++i) vy[i] += phi.c[i];

  BlockCenters centers;
  centers.x.emplace_back(z.x, tau);
  centers.y.emplace_back(z.y, tau);
  if (phi.mu_x > 0.0) centers.x.emplace_back(Vec(n, 0.0), phi.mu_x);
  if (phi.mu_y > 0.0) centers.y.emplace_back(Vec(m, 0.0), phi.mu_y);

  const Model* skew = model.empty() ? nullptr : &model;
  res.w = solve_implicit_prox(setup, centers, vx, vy, skew,
                              skew ? model.spectral_bound() : 0.0, nullptr, z);

  // second prox: everything evaluated at w, single center z
  auto [bwx, btwy] = b_view.matvec_pair(res.w.x, res.w.y);
  Vec gx = btwy, gy = scaled(bwx, -1.0);
  const Vec mwx = model.rows() ? model.mul(res.w.x) : Vec(m, 0.0);
  const Vec mtwy = model.rows() ? model.tmul(res.w.y) : Vec(n, 0.0);
  for (int j = 0; j < n; ++j) gx[j] += phi.b[j] + phi.mu_x * res.w.x[j] + mtwy[j];
  for (int i = 0; i < m; ++i) gy[i] += phi.c[i] + phi.mu_y * res.w.y[i] - mwx[i];

  std::vector<WeightedCenter> cx{{&z.x, tau}}, cy{{&z.y, tau}};
  res.z_next = detail::prox_blocks(setup, cx, cy, gx, gy, nullptr);

  const Vec t1x = sub(res.w.x, res.z_next.x), t1y = sub(res.w.y, z.y);
  const Vec t2x = sub(z.x, res.w.x), t2y = sub(res.w.y, res.z_next.y);
  res.verdict = run_judge(judge, b_view, t1x, t1y, t2x, t2y, tau);
  return res;
}

struct L2L2Options {
  double tau = 0.0;  // 0: pick from the Schatten norm per the p-dependent schedule
  double p = 2.0;
  JudgeKind judge = JudgeKind::SchattenTwoSided;
  std::optional<double> zeta;  // Schatten budget for the overflow guard
  long long overflow_margin = 16;
  std::function<void(const StepResult&)> step_observer;  // test instrumentation
};

inline double l2l2_tau_schedule(double schatten_p_norm, double p, double epsilon) {
  return std::pow(schatten_p_norm, p / (1.0 + p)) * std::pow(epsilon, 1.0 / (1.0 + p));
}

// Smooth-until-guilty mirror prox for l2-l2 composite games. Returns the
// uniform average of the J progress-iteration midpoints.
inline SolveReport solve_l2l2(const CountingOracle& oracle, const CompositePhi& phi,
                              double epsilon, const L2L2Options& opt = {}) {
  if (epsilon <= 0.0) throw ConfigError("solve_l2l2: epsilon must be positive");
  GameSetup setup{SetupKind::L2L2, oracle.cols(), oracle.rows(), 0.0};
  setup.validate();
  const double tau = opt.tau;
  if (tau <= 0.0) throw ConfigError("solve_l2l2: tau must be positive");

  const long long start_queries = oracle.query_count();
  const long long J = static_cast<long long>(std::ceil(tau / epsilon));
  long long guilty_budget = std::numeric_limits<long long>::max();
  if (opt.zeta)
    guilty_budget = static_cast<long long>(
                        std::ceil(std::pow(*opt.zeta, opt.p) / std::pow(tau, opt.p))) +
                    opt.overflow_margin;

  Model model(oracle.rows(), oracle.cols());
  ResidualView residual(oracle, model);

  GamePoint z = setup.center();
  GamePoint sum = setup.center();  // zero point in l2-l2
  long long progress = 0, guilty = 0;

  while (progress < J) {
    StepResult step = sugm_step(setup, z, tau, residual, phi, model, opt.judge);
    if (opt.step_observer) opt.step_observer(step);
    if (step.verdict.flag == JudgeFlag::Guilty) {
      for (const auto& f : step.verdict.update) model.add_factor(f);
      ++guilty;
      if (guilty > guilty_budget)
        throw ModelUpdateOverflow("solve_l2l2: guilty steps exceeded the Schatten budget");
    } else {
      axpy(sum.x, 1.0, step.w.x);
      axpy(sum.y, 1.0, step.w.y);
      z = step.z_next;
      ++progress;
    }
  }

  SolveReport rep;
  rep.z.x = scaled(sum.x, 1.0 / static_cast<double>(J));
  rep.z.y = scaled(sum.y, 1.0 / static_cast<double>(J));
  rep.queries = oracle.query_count() - start_queries;
  rep.progress_iters = progress;
  rep.guilty_iters = guilty;
  return rep;
}

// ---------------------------------------------------------------------------
// Composite gap over the product of unit balls, by closed-form best
// responses (shrinkage-projected linear optima).
// ---------------------------------------------------------------------------

namespace detail {

// max_{||y|| <= 1} g^T y - (mu/2)||y||^2
inline double ball_max_linear_quad(const Vec& g, double mu) {
  const double r = norm2(g);
  if (mu <= 0.0) return r;
  if (r <= mu) return 0.5 * r * r / mu;
  return r - 0.5 * mu;
}

}  // namespace detail

inline double gap_l2l2(const DenseMatrix& a, const CompositePhi& phi, const GamePoint& z) {
  // max_y F(z_x, y): constant terms in x plus the shrinkage optimum
  Vec gy = a.mul(z.x);
  for (std::size_t i = 0; i < gy.size(); ++i) gy[i] -= phi.c[i];
  const double best_y = dot(phi.b, z.x) + 0.5 * phi.mu_x * dot(z.x, z.x) +
                        detail::ball_max_linear_quad(gy, phi.mu_y);

  // min_x F(x, z_y) = -c^T z_y - (mu_y/2)||z_y||^2 - max_x [-(h^T x) - (mu_x/2)||x||^2]
  Vec h = a.tmul(z.y);
  for (std::size_t j = 0; j < h.size(); ++j) h[j] += phi.b[j];
  const double best_x = -dot(phi.c, z.y) - 0.5 * phi.mu_y * dot(z.y, z.y) -
                        detail::ball_max_linear_quad(h, phi.mu_x);

  return best_y - best_x;
}

}  // namespace matgame
