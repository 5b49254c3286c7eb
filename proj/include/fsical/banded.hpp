#pragma once

// Banded matrix storage and an in-place LU factorization without pivoting.
// The forward solver only produces symmetric positive definite systems, for
// which elimination without row exchanges is stable and keeps the band width.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace fsical {

template <typename Scalar>
class BandedMatrix {
 public:
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using DenseType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BandedMatrix() = default;

  BandedMatrix(Eigen::Index n, int lower, int upper)
      : n_(n), kl_(lower), ku_(upper), band_(DenseType::Zero(lower + upper + 1, n)) {
    if (n < 1 || lower < 0 || upper < 0)
      throw std::invalid_argument("BandedMatrix: invalid dimensions");
  }

  Eigen::Index size() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

  bool in_band(Eigen::Index i, Eigen::Index j) const {
    return j - i <= ku_ && i - j <= kl_ && i >= 0 && j >= 0 && i < n_ && j < n_;
  }

  // Column j is stored in band_.col(j); row i maps to band row ku + i - j.
  Scalar& operator()(Eigen::Index i, Eigen::Index j) {
    if (!in_band(i, j)) throw std::out_of_range("BandedMatrix: entry outside band");
    return band_(ku_ + i - j, j);
  }

  Scalar operator()(Eigen::Index i, Eigen::Index j) const {
    if (!in_band(i, j)) return Scalar(0);
    return band_(ku_ + i - j, j);
  }

  void set_zero() { band_.setZero(); }

  /// Replace row i by the identity row (Dirichlet enforcement).
  void set_identity_row(Eigen::Index i) {
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - kl_);
         j <= std::min<Eigen::Index>(n_ - 1, i + ku_); ++j)
      (*this)(i, j) = Scalar(i == j);
  }

  void set_identity_col(Eigen::Index j) {
    for (Eigen::Index i = std::max<Eigen::Index>(0, j - ku_);
         i <= std::min<Eigen::Index>(n_ - 1, j + kl_); ++i)
      (*this)(i, j) = Scalar(i == j);
  }

  template <typename Derived>
  VectorType operator*(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != n_) throw std::invalid_argument("BandedMatrix: size mismatch in product");
    VectorType y = VectorType::Zero(n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, j - ku_);
      const Eigen::Index hi = std::min<Eigen::Index>(n_ - 1, j + kl_);
      for (Eigen::Index i = lo; i <= hi; ++i) y(i) += band_(ku_ + i - j, j) * x(j);
    }
    return y;
  }

  BandedMatrix& operator+=(const BandedMatrix& other) {
    check_shape(other);
    band_ += other.band_;
    return *this;
  }

  friend BandedMatrix operator+(BandedMatrix a, const BandedMatrix& b) { return a += b; }

  friend BandedMatrix operator*(Scalar s, BandedMatrix a) {
    a.band_ *= s;
    return a;
  }

  DenseType to_dense() const {
    DenseType d = DenseType::Zero(n_, n_);
    for (Eigen::Index j = 0; j < n_; ++j)
      for (Eigen::Index i = std::max<Eigen::Index>(0, j - ku_);
           i <= std::min<Eigen::Index>(n_ - 1, j + kl_); ++i)
        d(i, j) = band_(ku_ + i - j, j);
    return d;
  }

  const DenseType& band() const { return band_; }

 private:
  void check_shape(const BandedMatrix& other) const {
    if (other.n_ != n_ || other.kl_ != kl_ || other.ku_ != ku_)
      throw std::invalid_argument("BandedMatrix: shape mismatch");
  }

  Eigen::Index n_ = 0;
  int kl_ = 0;
  int ku_ = 0;
  DenseType band_;
};

/// LU factors of a banded matrix, stored in the same band layout
/// (unit lower factor below the diagonal, upper factor on and above).
template <typename Scalar>
class BandedLu {
 public:
  using VectorType = typename BandedMatrix<Scalar>::VectorType;

  BandedLu() = default;
  explicit BandedLu(BandedMatrix<Scalar> a) { compute(std::move(a)); }

  void compute(BandedMatrix<Scalar> a) {
    lu_ = std::move(a);
    const Eigen::Index n = lu_.size();
    const int kl = lu_.lower();
    const int ku = lu_.upper();
    Scalar scale(0);
    for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(lu_(i, i)));
    const Scalar tiny = scale * std::numeric_limits<Scalar>::epsilon();
    for (Eigen::Index k = 0; k < n; ++k) {
      const Scalar pivot = lu_(k, k);
      if (!(std::abs(pivot) > tiny))
        throw std::runtime_error("BandedLu: zero pivot at row " + std::to_string(k));
      const Eigen::Index last_row = std::min<Eigen::Index>(n - 1, k + kl);
      const Eigen::Index last_col = std::min<Eigen::Index>(n - 1, k + ku);
      for (Eigen::Index i = k + 1; i <= last_row; ++i) {
        const Scalar l = lu_(i, k) / pivot;
        lu_(i, k) = l;
        for (Eigen::Index j = k + 1; j <= last_col; ++j) {
          if (lu_.in_band(i, j)) lu_(i, j) -= l * lu_(k, j);
        }
      }
    }
    factored_ = true;
  }

  bool factored() const { return factored_; }

  template <typename Derived>
  VectorType solve(const Eigen::MatrixBase<Derived>& b) const {
    if (!factored_) throw std::logic_error("BandedLu: solve before compute");
    const Eigen::Index n = lu_.size();
    if (b.size() != n) throw std::invalid_argument("BandedLu: rhs size mismatch");
    const int kl = lu_.lower();
    const int ku = lu_.upper();
    VectorType x = b;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - kl); j < i; ++j) x(i) -= lu_(i, j) * x(j);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      const Eigen::Index last = std::min<Eigen::Index>(n - 1, i + ku);
      for (Eigen::Index j = i + 1; j <= last; ++j) x(i) -= lu_(i, j) * x(j);
      x(i) /= lu_(i, i);
    }
    return x;
  }

 private:
  BandedMatrix<Scalar> lu_;
  bool factored_ = false;
};

}  // namespace fsical
