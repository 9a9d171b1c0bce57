#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "matgame/core.hpp"
#include "matgame/oracle.hpp"

namespace matgame {

// ---------------------------------------------------------------------------
// Smooth-guilty judges. Each detects whether one of two test pairs certifies
// a tau-large bilinear component of B, and if so emits a model update D as
// rank-one factors. Each call consumes at most 3 oracle queries; the matvecs
// from the winning check double as the witness images Bu and B^T v.
// ---------------------------------------------------------------------------

enum class JudgeFlag { Smooth, Guilty };
enum class JudgeKind { SchattenTwoSided, FrobeniusRankOne, OneSidedProjection };

inline const char* judge_name(JudgeKind k) {
  switch (k) {
    case JudgeKind::SchattenTwoSided: return "judge_s";
    case JudgeKind::FrobeniusRankOne: return "judge_f";
    case JudgeKind::OneSidedProjection: return "judge_proj";
  }
  return "?";
}

struct JudgeVerdict {
  JudgeFlag flag = JudgeFlag::Smooth;
  std::vector<RankOneFactor> update;  // D, empty when smooth
  Vec witness_u;                      // unit n-vector when guilty
  Vec witness_v;                      // unit m-vector when guilty
  double bilinear = 0.0;              // v^T B u of the winning pair
};

namespace detail {

struct CheckResult {
  bool guilty = false;
  Vec u, v;      // unit witnesses
  Vec bu, btv;   // B u and B^T v, reused from the check query
  double vbu = 0.0;
};

// Evaluates one test pair; strict '>' so ties fall to smooth, and zero-norm
// blocks short-circuit without spending a query.
inline CheckResult check_pair(const MatVecSource& b, const Vec& zx, const Vec& zy, double tau) {
  CheckResult r;
  const double nx = norm2(zx), ny = norm2(zy);
  if (nx == 0.0 || ny == 0.0) return r;
  auto [bx, bty] = b.matvec_pair(zx, zy);
  const double bil = dot(zy, bx);
  if (!(bil > tau * nx * ny)) return r;
  r.guilty = true;
  r.u = scaled(zx, 1.0 / nx);
  r.v = scaled(zy, 1.0 / ny);
  r.bu = scaled(bx, 1.0 / nx);
  r.btv = scaled(bty, 1.0 / ny);
  r.vbu = bil / (nx * ny);
  return r;
}

inline CheckResult run_checks(const MatVecSource& b, const Vec& z1x, const Vec& z1y,
                              const Vec& z2x, const Vec& z2y, double tau) {
  CheckResult r = check_pair(b, z1x, z1y, tau);
  if (r.guilty) return r;
  return check_pair(b, z2x, z2y, tau);
}

}  // namespace detail

// Two-sided Schatten projection: D = B - (I - vv^T) B (I - uu^T), realized as
// the three factors v (B^T v)^T + (B u) u^T - (v^T B u) v u^T.
inline JudgeVerdict judge_s(const MatVecSource& b, const Vec& z1x, const Vec& z1y, const Vec& z2x,
                            const Vec& z2y, double tau) {
  JudgeVerdict verdict;
  auto r = detail::run_checks(b, z1x, z1y, z2x, z2y, tau);
  if (!r.guilty) return verdict;
  verdict.flag = JudgeFlag::Guilty;
  verdict.witness_u = r.u;
  verdict.witness_v = r.v;
  verdict.bilinear = r.vbu;
  verdict.update.push_back({r.btv, r.v, 1.0});
  verdict.update.push_back({r.u, r.bu, 1.0});
  verdict.update.push_back({r.u, r.v, -r.vbu});
  return verdict;
}

// Single rank-one update: D = (v^T B u) v u^T.
inline JudgeVerdict judge_f(const MatVecSource& b, const Vec& z1x, const Vec& z1y, const Vec& z2x,
                            const Vec& z2y, double tau) {
  JudgeVerdict verdict;
  auto r = detail::run_checks(b, z1x, z1y, z2x, z2y, tau);
  if (!r.guilty) return verdict;
  verdict.flag = JudgeFlag::Guilty;
  verdict.witness_u = r.u;
  verdict.witness_v = r.v;
  verdict.bilinear = r.vbu;
  verdict.update.push_back({r.u, r.v, r.vbu});
  return verdict;
}

// One-sided projection: D = B uu^T, so B - D = B (I - uu^T).
inline JudgeVerdict judge_proj(const MatVecSource& b, const Vec& z1x, const Vec& z1y,
                               const Vec& z2x, const Vec& z2y, double tau) {
  JudgeVerdict verdict;
  auto r = detail::run_checks(b, z1x, z1y, z2x, z2y, tau);
  if (!r.guilty) return verdict;
  verdict.flag = JudgeFlag::Guilty;
  verdict.witness_u = r.u;
  verdict.witness_v = r.v;
  verdict.bilinear = r.vbu;
  verdict.update.push_back({r.u, r.bu, 1.0});
  return verdict;
}

inline JudgeVerdict run_judge(JudgeKind kind, const MatVecSource& b, const Vec& z1x,
                              const Vec& z1y, const Vec& z2x, const Vec& z2y, double tau) {
  switch (kind) {
    case JudgeKind::SchattenTwoSided: return judge_s(b, z1x, z1y, z2x, z2y, tau);
    case JudgeKind::FrobeniusRankOne: return judge_f(b, z1x, z1y, z2x, z2y, tau);
    case JudgeKind::OneSidedProjection: return judge_proj(b, z1x, z1y, z2x, z2y, tau);
  }
  return {};
}

// Convenience overload for d-vector test points split as (x | y).
inline JudgeVerdict run_judge(JudgeKind kind, const MatVecSource& b, const GamePoint& z1,
                              const GamePoint& z2, double tau) {
  return run_judge(kind, b, z1.x, z1.y, z2.x, z2.y, tau);
}

}  // namespace matgame
