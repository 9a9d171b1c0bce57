#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "matgame/core.hpp"
#include "matgame/geometry.hpp"

namespace matgame {

// ---------------------------------------------------------------------------
// Matrix-vector access. One "query" is one paired evaluation (Bx, B^T y).
// ---------------------------------------------------------------------------

struct MatVecSource {
  virtual ~MatVecSource() = default;
  virtual int rows() const = 0;
  virtual int cols() const = 0;
  virtual std::pair<Vec, Vec> matvec_pair(const Vec& x, const Vec& y) const = 0;
};

class CountingOracle : public MatVecSource {
 public:
  explicit CountingOracle(DenseMatrix a) : a_(std::move(a)) {}

  int rows() const override { return a_.rows(); }
  int cols() const override { return a_.cols(); }

  std::pair<Vec, Vec> matvec_pair(const Vec& x, const Vec& y) const override {
    if (static_cast<int>(x.size()) != a_.cols() || static_cast<int>(y.size()) != a_.rows())
      throw DimensionMismatch("CountingOracle::matvec_pair");
    count_.fetch_add(1, std::memory_order_relaxed);
    return {a_.mul(x), a_.tmul(y)};
  }

  long long query_count() const { return count_.load(std::memory_order_relaxed); }
  void reset_count() { count_.store(0, std::memory_order_relaxed); }

  // Dense access is reserved for generation/certification/test call sites.
  const DenseMatrix& dense() const { return a_; }

 private:
  DenseMatrix a_;
  mutable std::atomic<long long> count_{0};
};

// ---------------------------------------------------------------------------
// Model: an explicitly known accumulated matrix M = sum_k scale_k * v_k u_k^T
// (u on the n side, v on the m side). Applied explicitly, so a residual
// matvec against A - M still costs exactly one oracle query.
// ---------------------------------------------------------------------------

struct RankOneFactor {
  Vec u;  // length n
  Vec v;  // length m
  double scale = 1.0;
};

class Model {
 public:
  Model() = default;
  Model(int m, int n) : m_(m), n_(n) {}

  int rows() const { return m_; }
  int cols() const { return n_; }
  bool empty() const { return factors_.empty() && !densified_; }
  std::size_t rank_bound() const { return factors_.size(); }
  long long update_count() const { return updates_; }

  void clear() {
    factors_.clear();
    densified_ = false;
    cache_ = DenseMatrix();
    updates_ = 0;
  }

  void add_factor(RankOneFactor f) {
    if (static_cast<int>(f.u.size()) != n_ || static_cast<int>(f.v.size()) != m_)
      throw DimensionMismatch("Model::add_factor");
    ++updates_;
    if (densified_) {
      for (int i = 0; i < m_; ++i)
        for (int j = 0; j < n_; ++j) cache_(i, j) += f.scale * f.v[i] * f.u[j];
      return;
    }
    factors_.push_back(std::move(f));
    // Cap the per-query cost: densify once the factor list outgrows the
    // explicit multiply.
    if (2 * static_cast<int>(factors_.size()) > std::min(m_, n_)) densify();
  }

  Vec mul(const Vec& x) const {
    Vec y(m_, 0.0);
    if (densified_) return cache_.mul(x);
    for (const auto& f : factors_) {
      const double s = f.scale * dot(f.u, x);
      axpy(y, s, f.v);
    }
    return y;
  }

  Vec tmul(const Vec& y) const {
    Vec x(n_, 0.0);
    if (densified_) return cache_.tmul(y);
    for (const auto& f : factors_) {
      const double s = f.scale * dot(f.v, y);
      axpy(x, s, f.u);
    }
    return x;
  }

  DenseMatrix dense() const {
    if (densified_) return cache_;
    DenseMatrix d(m_, n_);
    for (const auto& f : factors_)
      for (int i = 0; i < m_; ++i)
        for (int j = 0; j < n_; ++j) d(i, j) += f.scale * f.v[i] * f.u[j];
    return d;
  }

  // Entrywise / row-norm upper bounds used to pick safe inner step sizes.
  double max_abs_bound() const {
    if (densified_) return cache_.max_abs();
    double s = 0.0;
    for (const auto& f : factors_) s += std::fabs(f.scale) * norm_inf(f.v) * norm_inf(f.u);
    return s;
  }
  double two_to_inf_bound() const {
    if (densified_) return cache_.two_to_inf();
    double s = 0.0;
    for (const auto& f : factors_) s += std::fabs(f.scale) * norm_inf(f.v) * norm2(f.u);
    return s;
  }
  double spectral_bound() const {
    if (densified_) return cache_.frobenius();
    double s = 0.0;
    for (const auto& f : factors_) s += std::fabs(f.scale) * norm2(f.v) * norm2(f.u);
    return s;
  }

 private:
  void densify() {
    cache_ = dense();
    densified_ = true;
    factors_.clear();
  }

  int m_ = 0, n_ = 0;
  std::vector<RankOneFactor> factors_;
  bool densified_ = false;
  DenseMatrix cache_;
  long long updates_ = 0;
};

// Residual view B = A - M. The subtraction is implicit: one oracle query plus
// explicit factor arithmetic.
class ResidualView : public MatVecSource {
 public:
  ResidualView(const MatVecSource& base, const Model& model) : base_(base), model_(model) {
    if (model.rows() != base.rows() || model.cols() != base.cols())
      throw DimensionMismatch("ResidualView: model dims");
  }

  int rows() const override { return base_.rows(); }
  int cols() const override { return base_.cols(); }

  std::pair<Vec, Vec> matvec_pair(const Vec& x, const Vec& y) const override {
    auto [ax, aty] = base_.matvec_pair(x, y);
    const Vec mx = model_.mul(x);
    const Vec mty = model_.tmul(y);
    for (int i = 0; i < rows(); ++i) ax[i] -= mx[i];
    for (int j = 0; j < cols(); ++j) aty[j] -= mty[j];
    return {ax, aty};
  }

 private:
  const MatVecSource& base_;
  const Model& model_;
};

inline std::pair<Vec, Vec> residual_matvec_pair(const MatVecSource& oracle, const Model& model,
                                                const Vec& x, const Vec& y) {
  return ResidualView(oracle, model).matvec_pair(x, y);
}

// Grounded view (B)_{z_n} = diag(y_n)^{1/2} B diag(x_n)^{1/2} on simplex
// sides; identity on ball sides. One oracle query per matvec pair.
class GroundedView : public MatVecSource {
 public:
  GroundedView(const MatVecSource& base, const GameSetup& setup, const GamePoint& norm_point)
      : base_(base), setup_(setup) {
    for (double v : norm_point.x)
      if (setup.x_is_simplex() && v <= 0.0)
        throw NonpositiveNormPoint("GroundedView: norm point x");
    for (double v : norm_point.y)
      if (setup.y_is_simplex() && v <= 0.0)
        throw NonpositiveNormPoint("GroundedView: norm point y");
    sx_.assign(norm_point.x.size(), 1.0);
    sy_.assign(norm_point.y.size(), 1.0);
    if (setup.x_is_simplex())
      for (std::size_t j = 0; j < sx_.size(); ++j) sx_[j] = std::sqrt(norm_point.x[j]);
    if (setup.y_is_simplex())
      for (std::size_t i = 0; i < sy_.size(); ++i) sy_[i] = std::sqrt(norm_point.y[i]);
  }

  int rows() const override { return base_.rows(); }
  int cols() const override { return base_.cols(); }

  std::pair<Vec, Vec> matvec_pair(const Vec& x, const Vec& y) const override {
    Vec xs(x.size()), ys(y.size());
    for (std::size_t j = 0; j < x.size(); ++j) xs[j] = sx_[j] * x[j];
    for (std::size_t i = 0; i < y.size(); ++i) ys[i] = sy_[i] * y[i];
    auto [bx, bty] = base_.matvec_pair(xs, ys);
    for (std::size_t i = 0; i < bx.size(); ++i) bx[i] *= sy_[i];
    for (std::size_t j = 0; j < bty.size(); ++j) bty[j] *= sx_[j];
    return {bx, bty};
  }

  // Undo the rescaling on a rank-one update found in grounded coordinates.
  RankOneFactor unground(const RankOneFactor& f) const {
    RankOneFactor g = f;
    for (std::size_t j = 0; j < g.u.size(); ++j) g.u[j] /= sx_[j];
    for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] /= sy_[i];
    return g;
  }

 private:
  const MatVecSource& base_;
  GameSetup setup_;
  Vec sx_, sy_;
};

inline DenseMatrix grounded_dense(const DenseMatrix& b, const GameSetup& setup,
                                  const GamePoint& norm_point) {
  DenseMatrix g(b.rows(), b.cols());
  for (int i = 0; i < b.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      double s = b(i, j);
      if (setup.y_is_simplex()) s *= std::sqrt(norm_point.y[i]);
      if (setup.x_is_simplex()) s *= std::sqrt(norm_point.x[j]);
      g(i, j) = s;
    }
  return g;
}

// ---------------------------------------------------------------------------
// Row-norm aggregate bounding the grounded Schatten-p norm:
//   Upsilon_p(A) = || (||A_{i,:}||_s)_i ||_{2p/(2-p)},  s = inf or 2,
// with the exponent mapping to max for p = 2.
// ---------------------------------------------------------------------------

inline double upsilon_p(const DenseMatrix& a, double p, const GameSetup& setup) {
  if (p < 1.0 || p > 2.0) throw ConfigError("upsilon_p: p must lie in [1,2]");
  Vec rows(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    if (setup.x_is_simplex()) {
      for (int j = 0; j < a.cols(); ++j) s = std::max(s, std::fabs(a(i, j)));
    } else {
      for (int j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
      s = std::sqrt(s);
    }
    rows[i] = s;
  }
  if (p == 2.0) return *std::max_element(rows.begin(), rows.end());
  const double q = 2.0 * p / (2.0 - p);
  double s = 0.0;
  for (double r : rows) s += std::pow(r, q);
  return std::pow(s, 1.0 / q);
}

// ---------------------------------------------------------------------------
// Matrix file formats.
//   text:   "MATGAME dense m n" header, then m rows of n decimals
//   binary: magic "MGDENSE1", u32 m, u32 n (little endian), f64 row-major
// ---------------------------------------------------------------------------

inline void write_matrix_text(const DenseMatrix& a, std::ostream& os) {
  os << "MATGAME dense " << a.rows() << " " << a.cols() << "\n";
  os.precision(17);
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      if (j) os << " ";
      os << a(i, j);
    }
    os << "\n";
  }
}

inline DenseMatrix read_matrix_text(std::istream& is) {
  std::string magic, kind;
  int m = 0, n = 0;
  if (!(is >> magic >> kind >> m >> n) || magic != "MATGAME" || kind != "dense" || m < 1 || n < 1)
    throw IoError("bad MATGAME text header");
  DenseMatrix a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (!(is >> a(i, j))) throw IoError("truncated MATGAME matrix body");
  return a;
}

inline void write_matrix_binary(const DenseMatrix& a, std::ostream& os) {
  const char magic[8] = {'M', 'G', 'D', 'E', 'N', 'S', 'E', '1'};
  os.write(magic, 8);
  const std::uint32_t m = static_cast<std::uint32_t>(a.rows());
  const std::uint32_t n = static_cast<std::uint32_t>(a.cols());
  os.write(reinterpret_cast<const char*>(&m), 4);
  os.write(reinterpret_cast<const char*>(&n), 4);
  os.write(reinterpret_cast<const char*>(a.data().data()),
           static_cast<std::streamsize>(a.data().size() * sizeof(double)));
}

inline DenseMatrix read_matrix_binary(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "MGDENSE1", 8) != 0) throw IoError("bad MGDENSE1 magic");
  std::uint32_t m = 0, n = 0;
  is.read(reinterpret_cast<char*>(&m), 4);
  is.read(reinterpret_cast<char*>(&n), 4);
  if (!is || m < 1 || n < 1) throw IoError("bad MGDENSE1 dims");
  DenseMatrix a(static_cast<int>(m), static_cast<int>(n));
  is.read(reinterpret_cast<char*>(a.data().data()),
          static_cast<std::streamsize>(a.data().size() * sizeof(double)));
  if (!is) throw IoError("truncated MGDENSE1 body");
  return a;
}

inline DenseMatrix load_matrix(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open matrix file: " + path);
  char head[8] = {0};
  f.read(head, 8);
  f.seekg(0);
  if (std::memcmp(head, "MGDENSE1", 8) == 0) return read_matrix_binary(f);
  return read_matrix_text(f);
}

inline void save_matrix(const DenseMatrix& a, const std::string& path, bool binary) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open matrix file for writing: " + path);
  if (binary)
    write_matrix_binary(a, f);
  else
    write_matrix_text(a, f);
}

}  // namespace matgame
