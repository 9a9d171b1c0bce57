#pragma once

#include <cmath>
#include <vector>

#include "matgame/core.hpp"
#include "matgame/geometry.hpp"
#include "matgame/l2l2.hpp"
#include "matgame/oracle.hpp"

namespace matgame {

// ---------------------------------------------------------------------------
// Classic mirror prox (extragradient) baseline, all three setups. With the
// standard normalizations the gradient mapping is 1-Lipschitz, so the default
// step parameter lambda = 1 reaches gap <= eps in ceil(lambda Gamma / eps)
// steps at 2 queries per step.
// ---------------------------------------------------------------------------

struct MirrorProxOptions {
  double step_lambda = 1.0;
  const CompositePhi* phi = nullptr;  // optional composite (l2-l2 games)
};

inline SolveReport mirror_prox(const CountingOracle& oracle, SetupKind kind, double epsilon,
                               const MirrorProxOptions& opt = {}) {
  if (epsilon <= 0.0) throw ConfigError("mirror_prox: epsilon must be positive");
  if (opt.step_lambda <= 0.0) throw ConfigError("mirror_prox: lambda must be positive");
  GameSetup setup{kind, oracle.cols(), oracle.rows(), 0.0};
  setup.validate();
  if (opt.phi != nullptr && kind != SetupKind::L2L2)
    throw ConfigError("mirror_prox: composite terms are an l2-l2 feature");

  const long long start_queries = oracle.query_count();
  const double lambda = opt.step_lambda;
  const long long steps =
      std::max<long long>(1, static_cast<long long>(std::ceil(lambda * setup.gamma() / epsilon)));

  // signed operator value at p, including the composite part when present
  auto signed_grad = [&](const GamePoint& p, Vec& gx, Vec& gy) {
    auto [ax, aty] = oracle.matvec_pair(p.x, p.y);
    gx = aty;
    gy = scaled(ax, -1.0);
    if (opt.phi != nullptr) {
      for (int j = 0; j < setup.n; ++j) gx[j] += opt.phi->b[j] + opt.phi->mu_x * p.x[j];
      for (int i = 0; i < setup.m; ++i) gy[i] += opt.phi->c[i] + opt.phi->mu_y * p.y[i];
    }
  };

  GamePoint z = setup.center();
  GamePoint sum{Vec(setup.n, 0.0), Vec(setup.m, 0.0)};
  Vec gx, gy;

  for (long long t = 0; t < steps; ++t) {
    std::vector<WeightedCenter> cx{{&z.x, lambda}}, cy{{&z.y, lambda}};
    signed_grad(z, gx, gy);
    GamePoint w = detail::prox_blocks(setup, cx, cy, gx, gy, nullptr);

    signed_grad(w, gx, gy);
    z = detail::prox_blocks(setup, cx, cy, gx, gy, nullptr);

    axpy(sum.x, 1.0, w.x);
    axpy(sum.y, 1.0, w.y);
  }

  SolveReport rep;
  rep.z.x = scaled(sum.x, 1.0 / static_cast<double>(steps));
  rep.z.y = scaled(sum.y, 1.0 / static_cast<double>(steps));
  rep.progress_iters = steps;
  rep.queries = oracle.query_count() - start_queries;
  return rep;
}

// ---------------------------------------------------------------------------
// Simultaneous multiplicative weights for l1-l1 games, the standard
// O(log(mn)/eps^2) baseline. Rate and horizon follow the usual regret
// analysis; the constant is exposed since only the rate's shape matters.
// ---------------------------------------------------------------------------

struct MwuOptions {
  double horizon_const = 12.0;
};

inline SolveReport mwu(const CountingOracle& oracle, double epsilon, const MwuOptions& opt = {}) {
  if (epsilon <= 0.0) throw ConfigError("mwu: epsilon must be positive");
  const int n = oracle.cols(), m = oracle.rows();
  const double logmn = std::log(static_cast<double>(m) * static_cast<double>(n));
  const long long steps = std::max<long long>(
      1, static_cast<long long>(std::ceil(opt.horizon_const * logmn / (epsilon * epsilon))));
  const double eta = std::sqrt(logmn / static_cast<double>(steps));

  const long long start_queries = oracle.query_count();
  Vec x(n, 1.0 / n), y(m, 1.0 / m);
  Vec xsum(n, 0.0), ysum(m, 0.0);

  auto renorm_exp = [](Vec& v, const Vec& g, double scale) {
    double mx = -std::numeric_limits<double>::infinity();
    Vec lg(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      lg[i] = std::log(std::max(v[i], 1e-300)) + scale * g[i];
      mx = std::max(mx, lg[i]);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = std::exp(lg[i] - mx);
      s += v[i];
    }
    for (double& e : v) e /= s;
  };

  for (long long t = 0; t < steps; ++t) {
    auto [ax, aty] = oracle.matvec_pair(x, y);
    axpy(xsum, 1.0, x);
    axpy(ysum, 1.0, y);
    renorm_exp(x, aty, -eta);  // minimizer descends on A^T y
    renorm_exp(y, ax, +eta);   // maximizer ascends on A x
  }

  SolveReport rep;
  rep.z.x = scaled(xsum, 1.0 / static_cast<double>(steps));
  rep.z.y = scaled(ysum, 1.0 / static_cast<double>(steps));
  rep.progress_iters = steps;
  rep.queries = oracle.query_count() - start_queries;
  return rep;
}

}  // namespace matgame
