#include <catch2/catch_amalgamated.hpp>

#include "matgame.hpp"
#include "support.hpp"

using namespace matgame;
using Catch::Approx;

namespace {

GameSetup truncated_setup(SetupKind kind, int n, int m, double eps) {
  GameSetup s{kind, n, m, 0.0};
  s.nu = truncation_level(s, eps);
  s.validate();
  return s;
}

SubproblemSpec basic_spec(const GameSetup& s, const GamePoint& z_c, double alpha, double tau,
                          double acc, double ball_factor = 500.0) {
  SubproblemSpec spec;
  spec.z_c = z_c;
  spec.z_n = z_c;
  spec.restriction = MultiplicativeBall{z_c, ball_factor, s.nu};
  spec.alpha = alpha;
  spec.tau = tau;
  spec.target_accuracy = acc;
  return spec;
}

}  // namespace

TEST_CASE("sugsm_step fixed point") {
  const GameSetup s = truncated_setup(SetupKind::L1L1, 3, 3, 0.1);
  DenseMatrix a(3, 3);
  CountingOracle o(a);
  Model model(3, 3);
  ResidualView view(o, model);
  const GamePoint z_c = s.center();
  SubproblemSpec spec = basic_spec(s, z_c, 0.5, 0.7, 1e-8);
  GroundedView grounded(view, s, spec.z_n);
  SmConfig cfg;
  SmStepContext ctx{s, spec, view, model, grounded, cfg.c2(spec.restriction.factor) * spec.tau,
                    cfg};
  StepResultSm r = sugsm_step(ctx, z_c);
  REQUIRE(r.verdict.flag == JudgeFlag::Smooth);
  for (int i = 0; i < 3; ++i) {
    REQUIRE(r.w.x[i] == Approx(z_c.x[i]).margin(1e-10));
    REQUIRE(r.z_next.x[i] == Approx(z_c.x[i]).margin(1e-10));
  }
}

TEST_CASE("smooth steps contract toward the restricted prox point") {
  Xoshiro256pp rng(61);
  for (SetupKind kind : {SetupKind::L1L1, SetupKind::L2L1}) {
    const GameSetup s = truncated_setup(kind, 6, 6, 0.1);
    DenseMatrix a = generate_instance(InstanceFamily::SignRandom, kind, 6, 6, 100 + (int)kind);
    CountingOracle o(a);
    Model model(6, 6);

    const GamePoint z_c = testref::random_domain_point(s, rng, 2e-2);
    const double alpha = 0.4, tau = 1.05;  // tau above the relative Lipschitz bound
    SubproblemSpec spec = basic_spec(s, z_c, alpha, tau, 1e-9, 60.0);
    spec.z_n = z_c;

    const GamePoint z_star = testref::reference_prox(s, a, z_c, alpha, &spec.restriction);

    int checked = 0;
    SmConfig cfg;
    auto observer = [&](const StepTrace& t) {
      if (t.flag != JudgeFlag::Smooth) return;
      const double before = bregman(s, z_star, t.z_before);
      const double after = bregman(s, z_star, t.z_after);
      if (before > 1e-12) {
        REQUIRE(after <= before / (1.0 + alpha / tau) * (1.0 + 1e-6) + 1e-13);
        ++checked;
      }
    };
    SubproblemResult res = solve_subproblem(s, o, model, spec, cfg, observer);
    REQUIRE(checked >= 5);
    REQUIRE(bregman(s, z_star, res.z_out) <= 1e-9 * (1.0 + 1e-6) + 1e-12);
  }
}

TEST_CASE("guilty steps drop the grounded Schatten potential") {
  Xoshiro256pp rng(62);
  const GameSetup s = truncated_setup(SetupKind::L2L1, 8, 6, 0.1);
  DenseMatrix a = generate_instance(InstanceFamily::SignRandom, SetupKind::L2L1, 6, 8, 5);
  CountingOracle o(a);
  Model model(6, 8);

  const GamePoint z_c = testref::random_domain_point(s, rng, 2e-2);
  SubproblemSpec spec = basic_spec(s, z_c, 0.02, 0.05, 1e-7, 500.0);

  SmConfig cfg;
  cfg.judge = JudgeKind::OneSidedProjection;
  const double thresh = cfg.c2(spec.restriction.factor) * spec.tau;

  long long guilty = 0;
  const DenseMatrix ground0 = grounded_dense(a, s, spec.z_n);
  auto observer = [&](const StepTrace& t) {
    if (t.flag == JudgeFlag::Guilty) ++guilty;
  };
  SubproblemResult res = solve_subproblem(s, o, model, spec, cfg, observer);
  REQUIRE(res.guilty_count == guilty);
  REQUIRE(guilty >= 1);
  const DenseMatrix ground_k = grounded_dense(a - model.dense(), s, spec.z_n);
  const double before = std::pow(schatten_norm(ground0, 2.0), 2.0);
  const double after = std::pow(schatten_norm(ground_k, 2.0), 2.0);
  REQUIRE(after <= before - static_cast<double>(guilty) * thresh * thresh + 1e-8);
}

TEST_CASE("judge_proj model composition is a right projection") {
  Xoshiro256pp rng(63);
  const GameSetup s = truncated_setup(SetupKind::L2L1, 7, 5, 0.1);
  DenseMatrix a = generate_instance(InstanceFamily::SignRandom, SetupKind::L2L1, 5, 7, 9);
  CountingOracle o(a);
  Model model(5, 7);
  const GamePoint z_c = testref::random_domain_point(s, rng, 2e-2);
  SubproblemSpec spec = basic_spec(s, z_c, 0.02, 0.04, 1e-7);
  SmConfig cfg;
  cfg.judge = JudgeKind::OneSidedProjection;
  SubproblemResult res = solve_subproblem(s, o, model, spec, cfg);
  REQUIRE(res.guilty_count >= 1);
  // A - M annihilates every witness direction it projected off: check that
  // (A - M) x stays in the row space of A and the 2->inf norm never grew
  const DenseMatrix residual = a - model.dense();
  REQUIRE(residual.two_to_inf() <= a.two_to_inf() + 1e-9);
  // projector structure: residual = A P for an orthogonal projector P, which
  // is equivalent to A (A - M)^+ ... we check the defining consequence
  // (A - M) u = 0 along stored witness directions via rank inspection:
  // rank(A) >= rank(residual) and every column op preserved row space.
  const Vec sa = singular_values(a);
  const Vec sr = singular_values(residual);
  int ra = 0, rr = 0;
  for (double v : sa)
    if (v > 1e-10) ++ra;
  for (double v : sr)
    if (v > 1e-10) ++rr;
  REQUIRE(rr <= ra);
}

TEST_CASE("solve_subproblem reaches the requested Bregman accuracy") {
  Xoshiro256pp rng(64);
  for (SetupKind kind : {SetupKind::L1L1, SetupKind::L2L1}) {
    const GameSetup s = truncated_setup(kind, 8, 8, 0.1);
    DenseMatrix a = generate_instance(InstanceFamily::SignRandom, kind, 8, 8, 11);
    CountingOracle o(a);
    Model model(8, 8);
    const GamePoint z_c = testref::random_domain_point(s, rng, 2e-2);
    const double alpha = 0.35;
    SubproblemSpec spec = basic_spec(s, z_c, alpha, 0.8, 1e-8, 400.0);
    SmConfig cfg;
    SubproblemResult res = solve_subproblem(s, o, model, spec, cfg);
    const GamePoint z_star = testref::reference_prox(s, a, z_c, alpha, &spec.restriction);
    REQUIRE(bregman(s, z_star, res.z_out) <= 1e-8 + 1e-11);
  }
}

TEST_CASE("iterates stay inside the restriction") {
  Xoshiro256pp rng(65);
  const GameSetup s = truncated_setup(SetupKind::L1L1, 5, 5, 0.2);
  DenseMatrix a = generate_instance(InstanceFamily::SignRandom, SetupKind::L1L1, 5, 5, 21);
  CountingOracle o(a);
  Model model(5, 5);
  const GamePoint z_c = testref::random_domain_point(s, rng, 2e-2);
  SubproblemSpec spec = basic_spec(s, z_c, 0.3, 0.6, 1e-7, 50.0);
  SmConfig cfg;
  auto observer = [&](const StepTrace& t) {
    REQUIRE(spec.restriction.contains(s, t.w, 1e-9));
    REQUIRE(spec.restriction.contains(s, t.z_after, 1e-9));
  };
  solve_subproblem(s, o, model, spec, cfg, observer);
}

TEST_CASE("subproblem query budget") {
  // queries <= c (tau/alpha log(Gamma/eps) + K) for a small constant c
  Xoshiro256pp rng(66);
  const GameSetup s = truncated_setup(SetupKind::L1L1, 8, 8, 0.1);
  DenseMatrix a = generate_instance(InstanceFamily::SignRandom, SetupKind::L1L1, 8, 8, 31);
  CountingOracle o(a);
  Model model(8, 8);
  const GamePoint z_c = testref::random_domain_point(s, rng, 2e-2);
  const double alpha = 0.25, tau = 0.8, acc = 1e-8;
  SubproblemSpec spec = basic_spec(s, z_c, alpha, tau, acc);
  SmConfig cfg;
  SubproblemResult res = solve_subproblem(s, o, model, spec, cfg);
  const double budget = (1.0 + tau / alpha) * std::log(s.gamma() / acc) +
                        static_cast<double>(res.guilty_count);
  REQUIRE(static_cast<double>(o.query_count()) <= 10.0 * budget + 50.0);
}

TEST_CASE("cwf properties") {
  Xoshiro256pp rng(67);
  const GameSetup s = truncated_setup(SetupKind::L1L1, 6, 6, 0.15);
  DenseMatrix a = generate_instance(InstanceFamily::SignRandom, SetupKind::L1L1, 6, 6, 41);
  CountingOracle o(a);
  Model model(6, 6);
  const GamePoint z_c = testref::random_domain_point(s, rng, 3e-2);
  const double alpha = 0.45, tau = 1.05;
  const GamePoint z_tilde = alpha_best_response(s, o, z_c, alpha);

  const double gamma_pw = 0.1;
  const double gamma_b = alpha * alpha / 10.0;
  SmConfig cfg;
  SubproblemResult res =
      cwf(s, o, model, z_c, z_tilde, z_tilde, tau, alpha, gamma_pw, gamma_b, cfg);

  const MultiplicativeBall ball{z_tilde, cfg.c1, s.nu};
  const GamePoint z_star = testref::reference_prox(s, a, z_c, alpha, &ball);

  // coordinatewise multiplicative closeness on simplex blocks
  for (int i = 0; i < s.n; ++i) {
    REQUIRE(res.z_out.x[i] <= (1.0 + gamma_pw) * z_star.x[i] + 1e-12);
    REQUIRE(res.z_out.x[i] >= z_star.x[i] / (1.0 + gamma_pw) - 1e-12);
  }
  for (int i = 0; i < s.m; ++i) {
    REQUIRE(res.z_out.y[i] <= (1.0 + gamma_pw) * z_star.y[i] + 1e-12);
    REQUIRE(res.z_out.y[i] >= z_star.y[i] / (1.0 + gamma_pw) - 1e-12);
  }
  REQUIRE(std::fabs(bregman(s, z_c, res.z_out) - bregman(s, z_c, z_star)) <= gamma_b + 1e-9);

  // the accuracy target shrinks with nu
  const double lug = std::log(1.0 / s.nu);
  const double e1 = cfg.cwf_const * std::min(gamma_pw * gamma_pw * s.nu * s.nu,
                                             gamma_b * gamma_b / (1.0 + lug * lug));
  GameSetup tighter = s;
  tighter.nu = s.nu / 4.0;
  const double lug2 = std::log(1.0 / tighter.nu);
  const double e2 = cfg.cwf_const * std::min(gamma_pw * gamma_pw * tighter.nu * tighter.nu,
                                             gamma_b * gamma_b / (1.0 + lug2 * lug2));
  REQUIRE(e2 <= e1);
}

TEST_CASE("gwf properties") {
  Xoshiro256pp rng(68);
  const GameSetup s = truncated_setup(SetupKind::L1L1, 5, 5, 0.2);
  DenseMatrix a = generate_instance(InstanceFamily::SignRandom, SetupKind::L1L1, 5, 5, 51);
  CountingOracle o(a);
  Model model(5, 5);
  const GamePoint z_c = testref::random_domain_point(s, rng, 3e-2);
  // alpha >= 1 keeps the movement at most 4, so the unrestricted prox point
  // is inside the factor-500 ball around the best response
  const double alpha = 1.0, tau = 1.05;
  const GamePoint z_tilde = alpha_best_response(s, o, z_c, alpha);

  const double gamma_v = 0.05, gamma_gb = alpha * alpha / 10.0;
  SmConfig cfg;
  SubproblemResult res = gwf(s, o, model, z_c, z_tilde, z_tilde, tau, alpha, gamma_v, gamma_gb,
                             cfg);
  const GamePoint w = res.z_out;

  // global prox point over the truncated domain (no ball)
  const GamePoint z_star = testref::reference_prox(s, a, z_c, alpha, nullptr);
  const MultiplicativeBall ball{z_tilde, cfg.c1, s.nu};
  REQUIRE(ball.contains(s, z_star, 1e-9));  // hypothesis of the property lemma

  // approximate variational inequality over the truncated domain
  Vec gx = a.tmul(w.y);
  Vec gy = scaled(a.mul(w.x), -1.0);
  for (int t = 0; t < 200; ++t) {
    const GamePoint u = testref::random_domain_point(s, rng, 2.0 * s.nu);
    const double lhs = dot(gx, sub(w.x, u.x)) + dot(gy, sub(w.y, u.y));
    const double rhs = alpha * (bregman(s, z_c, u) - bregman(s, w, u) - bregman(s, z_c, w));
    REQUIRE(lhs <= rhs + gamma_v + 1e-8);
  }
  REQUIRE(std::fabs(bregman(s, z_c, w) - bregman(s, z_c, z_star)) <= gamma_gb + 1e-9);
}

TEST_CASE("implicit composite handling contracts; linearized recorded for comparison") {
  Xoshiro256pp rng(69);
  const GameSetup s = truncated_setup(SetupKind::L1L1, 6, 6, 0.1);
  DenseMatrix a = generate_instance(InstanceFamily::SignRandom, SetupKind::L1L1, 6, 6, 61);

  int implicit_ok = 0, linearized_ok = 0, trials = 0;
  for (int t = 0; t < 12; ++t) {
    Model model(6, 6);
    Vec u(6), v(6);
    for (double& e : u) e = rng.normal();
    for (double& e : v) e = rng.normal();
    model.add_factor({u, v, rng.uniform(-0.4, 0.4)});

    CountingOracle o(a);
    ResidualView view(o, model);
    const GamePoint z_c = testref::random_domain_point(s, rng, 2e-2);
    const double alpha = 0.4;
    const double tau = 1.1 * (1.0 + model.max_abs_bound());
    SubproblemSpec spec = basic_spec(s, z_c, alpha, tau, 1e-9, 80.0);
    GamePoint z = nearest_in_ball(s, testref::random_domain_point(s, rng, 2e-2),
                                  spec.restriction);
    const GamePoint z_star = testref::reference_prox(s, a, z_c, alpha, &spec.restriction);
    const double before = bregman(s, z_star, z);
    if (before < 1e-9) continue;
    ++trials;

    GroundedView grounded(view, s, spec.z_n);
    for (CTermMode mode : {CTermMode::Implicit, CTermMode::Linearized}) {
      SmConfig cfg;
      cfg.c_term = mode;
      SmStepContext ctx{s, spec, view, model, grounded,
                        cfg.c2(spec.restriction.factor) * spec.tau, cfg};
      StepResultSm r = sugsm_step(ctx, z);
      if (r.verdict.flag != JudgeFlag::Smooth) continue;
      const double after = bregman(s, z_star, r.z_next);
      const bool contracted = after <= before / (1.0 + alpha / tau) * (1.0 + 1e-6) + 1e-12;
      if (mode == CTermMode::Implicit) {
        REQUIRE(contracted);
        ++implicit_ok;
      } else if (contracted) {
        ++linearized_ok;
      }
    }
  }
  REQUIRE(trials >= 8);
  INFO("implicit contracted on " << implicit_ok << "/" << trials
                                 << ", linearized on " << linearized_ok << "/" << trials);
  CHECK(implicit_ok == trials);
}
