#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace matgame {

using Vec = std::vector<double>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct MatGameError : std::runtime_error {
  explicit MatGameError(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : MatGameError {
  explicit DimensionMismatch(const std::string& what) : MatGameError(what) {}
};
struct NonpositiveReference : MatGameError {
  explicit NonpositiveReference(const std::string& what) : MatGameError(what) {}
};
struct NonpositiveNormPoint : MatGameError {
  explicit NonpositiveNormPoint(const std::string& what) : MatGameError(what) {}
};
struct InfeasibleRestriction : MatGameError {
  explicit InfeasibleRestriction(const std::string& what) : MatGameError(what) {}
};
struct NoBracket : MatGameError {
  explicit NoBracket(const std::string& what) : MatGameError(what) {}
};
struct ModelUpdateOverflow : MatGameError {
  explicit ModelUpdateOverflow(const std::string& what) : MatGameError(what) {}
};
struct SearchBudgetExceeded : MatGameError {
  explicit SearchBudgetExceeded(const std::string& what) : MatGameError(what) {}
};
struct IterationBudgetExceeded : MatGameError {
  explicit IterationBudgetExceeded(const std::string& what) : MatGameError(what) {}
};
struct ConfigError : MatGameError {
  explicit ConfigError(const std::string& what) : MatGameError(what) {}
};
struct IoError : MatGameError {
  explicit IoError(const std::string& what) : MatGameError(what) {}
};

// ---------------------------------------------------------------------------
// Small vector helpers
// ---------------------------------------------------------------------------

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm1(const Vec& a) {
  double s = 0.0;
  for (double v : a) s += std::fabs(v);
  return s;
}

inline double norm_inf(const Vec& a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::fabs(v));
  return s;
}

inline Vec& axpy(Vec& y, double a, const Vec& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
  return y;
}

inline Vec scaled(const Vec& x, double a) {
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = a * x[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec add(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec unit_vector(std::size_t n, std::size_t i) {
  Vec e(n, 0.0);
  e[i] = 1.0;
  return e;
}

// ---------------------------------------------------------------------------
// Dense matrices (row-major). Solvers only touch these through oracles; dense
// access is for generation, gap certification, and test assertions.
// ---------------------------------------------------------------------------

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int m, int n) : m_(m), n_(n), a_(static_cast<std::size_t>(m) * n, 0.0) {}

  int rows() const { return m_; }
  int cols() const { return n_; }

  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  Vec mul(const Vec& x) const {
    if (static_cast<int>(x.size()) != n_) throw DimensionMismatch("DenseMatrix::mul");
    Vec y(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double* row = &a_[static_cast<std::size_t>(i) * n_];
      double s = 0.0;
      for (int j = 0; j < n_; ++j) s += row[j] * x[j];
      y[i] = s;
    }
    return y;
  }

  Vec tmul(const Vec& y) const {
    if (static_cast<int>(y.size()) != m_) throw DimensionMismatch("DenseMatrix::tmul");
    Vec x(n_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double* row = &a_[static_cast<std::size_t>(i) * n_];
      const double yi = y[i];
      for (int j = 0; j < n_; ++j) x[j] += row[j] * yi;
    }
    return x;
  }

  DenseMatrix transposed() const {
    DenseMatrix t(n_, m_);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double max_abs() const {
    double s = 0.0;
    for (double v : a_) s = std::max(s, std::fabs(v));
    return s;
  }

  double frobenius() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

  // max row l2 norm
  double two_to_inf() const {
    double best = 0.0;
    for (int i = 0; i < m_; ++i) {
      double s = 0.0;
      for (int j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
      best = std::max(best, s);
    }
    return std::sqrt(best);
  }

 private:
  int m_ = 0, n_ = 0;
  std::vector<double> a_;
};

inline DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix r(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) - b(i, j);
  return r;
}

// ---------------------------------------------------------------------------
// Game domains
// ---------------------------------------------------------------------------

enum class SetupKind { L2L2, L2L1, L1L1 };

inline const char* setup_name(SetupKind k) {
  switch (k) {
    case SetupKind::L2L2: return "l2l2";
    case SetupKind::L2L1: return "l2l1";
    case SetupKind::L1L1: return "l1l1";
  }
  return "?";
}

// A point z = (x, y) in the product domain.
struct GamePoint {
  Vec x;
  Vec y;

  int n() const { return static_cast<int>(x.size()); }
  int m() const { return static_cast<int>(y.size()); }
};

inline GamePoint operator-(const GamePoint& a, const GamePoint& b) {
  return GamePoint{sub(a.x, b.x), sub(a.y, b.y)};
}

// One of the three geometry configurations. `nu` is the truncation level of
// the simplex blocks (0 in the l2-l2 setup), `gamma()` the dgf range.
struct GameSetup {
  SetupKind kind = SetupKind::L1L1;
  int n = 0;
  int m = 0;
  double nu = 0.0;

  bool x_is_simplex() const { return kind == SetupKind::L1L1; }
  bool y_is_simplex() const { return kind != SetupKind::L2L2; }

  double gamma() const {
    switch (kind) {
      case SetupKind::L2L2: return 1.0;
      case SetupKind::L2L1: return 0.5 + std::log(static_cast<double>(m));
      case SetupKind::L1L1: return std::log(static_cast<double>(m) * static_cast<double>(n));
    }
    return 1.0;
  }

  void validate() const {
    if (n < 1 || m < 1) throw ConfigError("GameSetup: dims must be positive");
    if (nu < 0.0) throw ConfigError("GameSetup: nu must be nonnegative");
    if (x_is_simplex() && nu * n > 1.0) throw ConfigError("GameSetup: nu*n > 1, empty domain");
    if (y_is_simplex() && nu * m > 1.0) throw ConfigError("GameSetup: nu*m > 1, empty domain");
    if (kind == SetupKind::L2L2 && nu != 0.0) throw ConfigError("GameSetup: l2l2 has no truncation");
  }

  // dgf minimizer over the (truncated) domain: origin / uniform blocks.
  GamePoint center() const {
    GamePoint z;
    z.x.assign(n, x_is_simplex() ? 1.0 / n : 0.0);
    z.y.assign(m, y_is_simplex() ? 1.0 / m : 0.0);
    return z;
  }

  bool contains(const GamePoint& z, double tol = 1e-12) const {
    if (z.n() != n || z.m() != m) return false;
    auto simplex_ok = [tol](const Vec& v) {
      double s = 0.0;
      for (double e : v) {
        if (e < -tol) return false;
        s += e;
      }
      return std::fabs(s - 1.0) <= 1e-12 + tol;
    };
    auto ball_ok = [tol](const Vec& v) { return norm2(v) <= 1.0 + 1e-12 + tol; };
    const bool xo = x_is_simplex() ? simplex_ok(z.x) : ball_ok(z.x);
    const bool yo = y_is_simplex() ? simplex_ok(z.y) : ball_ok(z.y);
    return xo && yo;
  }
};

// ---------------------------------------------------------------------------
// Solve telemetry
// ---------------------------------------------------------------------------

struct OuterIterationRecord {
  double alpha = 0.0;
  double breg_move = 0.0;       // V(z^{k-1}, z^k)
  long long guilty_steps = 0;   // model updates attributable to this iteration
  long long checkdiv_calls = 0;
  GamePoint iterate;            // z^k
};

struct SolveReport {
  GamePoint z;
  double gap = std::numeric_limits<double>::quiet_NaN();  // filled by callers with dense access
  long long queries = 0;
  long long progress_iters = 0;
  long long guilty_iters = 0;
  long long outer_iters = 0;
  double wall_ms = 0.0;
  double sum_breg_moves = 0.0;
  std::vector<OuterIterationRecord> outer_trace;
};

}  // namespace matgame
