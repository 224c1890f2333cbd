#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "qtt/parallel.hpp"

namespace qtt {

using Index = Eigen::Index;

enum class TransformKind { identity, dft_unitary, dct2_orthonormal, custom };
enum class Direction { forward, inverse };

namespace detail {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Unnormalized DFT, X_k = sum_j x_j exp(-2*pi*i*j*k/n), any length.
template <typename Real>
Eigen::Vector<std::complex<Real>, Eigen::Dynamic> fft_unnormalized(
    const Eigen::Vector<std::complex<Real>, Eigen::Dynamic>& x) {
  Eigen::FFT<Real> fft;
  Eigen::Vector<std::complex<Real>, Eigen::Dynamic> out(x.size());
  fft.fwd(out, x);
  return out;
}

// Unnormalized inverse DFT via conjugation; avoids backend scaling flags.
template <typename Real>
Eigen::Vector<std::complex<Real>, Eigen::Dynamic> ifft_unnormalized(
    const Eigen::Vector<std::complex<Real>, Eigen::Dynamic>& x) {
  return fft_unnormalized<Real>(x.conjugate()).conjugate();
}

template <typename Real>
Eigen::Vector<std::complex<Real>, Eigen::Dynamic> dft_unitary_fast(
    const Eigen::Vector<std::complex<Real>, Eigen::Dynamic>& x,
    Direction dir) {
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(x.size()));
  if (dir == Direction::forward) return fft_unnormalized<Real>(x) * scale;
  return ifft_unnormalized<Real>(x) * scale;
}

// Orthonormal DCT-II of a real vector through one complex FFT of the same
// length (even/odd reordering plus a quarter-sample phase twist).
template <typename Real>
Eigen::Vector<Real, Eigen::Dynamic> dct2_ortho_fast_real(
    const Eigen::Vector<Real, Eigen::Dynamic>& x) {
  const Index n = x.size();
  using C = std::complex<Real>;
  Eigen::Vector<C, Eigen::Dynamic> v(n);
  for (Index j = 0; j < n; ++j)
    v[j] = (j < (n + 1) / 2) ? C(x[2 * j]) : C(x[2 * (n - 1 - j) + 1]);
  const auto V = fft_unnormalized<Real>(v);
  const Real s0 = std::sqrt(Real(1) / static_cast<Real>(n));
  const Real sk = std::sqrt(Real(2) / static_cast<Real>(n));
  Eigen::Vector<Real, Eigen::Dynamic> y(n);
  for (Index k = 0; k < n; ++k) {
    const Real angle = -static_cast<Real>(kPi) * static_cast<Real>(k) /
                       (2 * static_cast<Real>(n));
    const Real ck = Real(2) * (V[k] * std::polar(Real(1), angle)).real();
    y[k] = (k == 0 ? s0 : sk) * ck / Real(2);
  }
  return y;
}

// Inverse of the transform above (orthonormal DCT-III).
template <typename Real>
Eigen::Vector<Real, Eigen::Dynamic> dct3_ortho_fast_real(
    const Eigen::Vector<Real, Eigen::Dynamic>& y) {
  const Index n = y.size();
  using C = std::complex<Real>;
  const Real s0 = std::sqrt(Real(1) / static_cast<Real>(n));
  const Real sk = std::sqrt(Real(2) / static_cast<Real>(n));
  Eigen::Vector<C, Eigen::Dynamic> t(n);
  for (Index k = 0; k < n; ++k) {
    const Real a = (k == 0 ? s0 : sk) * y[k];
    const Real angle = static_cast<Real>(kPi) * static_cast<Real>(k) /
                       (2 * static_cast<Real>(n));
    t[k] = a * std::polar(Real(1), angle);
  }
  const auto u = ifft_unnormalized<Real>(t);
  Eigen::Vector<Real, Eigen::Dynamic> x(n);
  for (Index j = 0; 2 * j < n; ++j) x[2 * j] = u[j].real();
  for (Index j = 0; 2 * j + 1 < n; ++j) x[2 * j + 1] = u[n - 1 - j].real();
  return x;
}

// Complex extension: the transform is linear, so real and imaginary parts
// go through the real kernel independently.
template <typename Real>
Eigen::Vector<std::complex<Real>, Eigen::Dynamic> dct2_ortho_fast(
    const Eigen::Vector<std::complex<Real>, Eigen::Dynamic>& x,
    Direction dir) {
  const Eigen::Vector<Real, Eigen::Dynamic> re = x.real();
  const Eigen::Vector<Real, Eigen::Dynamic> im = x.imag();
  Eigen::Vector<Real, Eigen::Dynamic> yre, yim;
  if (dir == Direction::forward) {
    yre = dct2_ortho_fast_real<Real>(re);
    yim = dct2_ortho_fast_real<Real>(im);
  } else {
    yre = dct3_ortho_fast_real<Real>(re);
    yim = dct3_ortho_fast_real<Real>(im);
  }
  Eigen::Vector<std::complex<Real>, Eigen::Dynamic> out(x.size());
  for (Index k = 0; k < x.size(); ++k)
    out[k] = std::complex<Real>(yre[k], yim[k]);
  return out;
}

}  // namespace detail

// An invertible tube-mode transform: the matrix M defining the product
// x *M y = M^-1 (Mx .* My), or an orthonormal-basis transform for the
// quasitubal product. Immutable after construction; safe to share across
// threads.
template <typename Real>
class TransformSpecT {
 public:
  using Scalar = std::complex<Real>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;

  // DFT/DCT are realized as explicit matrices up to this length and as
  // O(n log n) transforms above it; the two paths agree within 1e-9.
  static constexpr Index kExplicitMatrixLimit = 4096;

  static TransformSpecT identity(Index n) {
    require_size(n);
    return TransformSpecT(TransformKind::identity, n);
  }

  static TransformSpecT dft_unitary(Index n) {
    require_size(n);
    TransformSpecT spec(TransformKind::dft_unitary, n);
    if (n <= kExplicitMatrixLimit) {
      Matrix m(n, n);
      for (Index j = 0; j < n; ++j)
        for (Index k = 0; k < n; ++k) {
          const Real angle = Real(-2) * static_cast<Real>(detail::kPi) *
                             static_cast<Real>((j * k) % n) /
                             static_cast<Real>(n);
          m(j, k) = std::polar(Real(1) / std::sqrt(static_cast<Real>(n)),
                               angle);
        }
      spec.matrix_ = std::move(m);
      spec.inverse_ = spec.matrix_.adjoint();
      spec.has_matrix_ = true;
    }
    return spec;
  }

  static TransformSpecT dct2_orthonormal(Index n) {
    require_size(n);
    TransformSpecT spec(TransformKind::dct2_orthonormal, n);
    if (n <= kExplicitMatrixLimit) {
      Matrix m(n, n);
      const Real s0 = std::sqrt(Real(1) / static_cast<Real>(n));
      const Real sk = std::sqrt(Real(2) / static_cast<Real>(n));
      for (Index k = 0; k < n; ++k)
        for (Index j = 0; j < n; ++j) {
          const Real angle = static_cast<Real>(detail::kPi) *
                             static_cast<Real>(k) *
                             (2 * static_cast<Real>(j) + 1) /
                             (2 * static_cast<Real>(n));
          m(k, j) = Scalar((k == 0 ? s0 : sk) * std::cos(angle));
        }
      spec.matrix_ = std::move(m);
      spec.inverse_ = spec.matrix_.transpose();
      spec.has_matrix_ = true;
    }
    return spec;
  }

  static TransformSpecT custom(Matrix m) {
    if (m.rows() != m.cols() || m.rows() < 1)
      throw std::invalid_argument("custom transform matrix must be square");
    TransformSpecT spec(TransformKind::custom, m.rows());
    Eigen::FullPivLU<Matrix> lu(m);
    if (!lu.isInvertible())
      throw std::invalid_argument("custom transform matrix is singular");
    Matrix inv = lu.inverse();
    const Real residual =
        (inv * m - Matrix::Identity(m.rows(), m.rows())).norm();
    if (!(residual <= Real(1e-10)))
      throw std::invalid_argument(
          "custom transform matrix is too ill-conditioned to invert to "
          "working precision");
    spec.matrix_ = std::move(m);
    spec.inverse_ = std::move(inv);
    spec.has_matrix_ = true;
    return spec;
  }

  TransformKind kind() const { return kind_; }
  Index size() const { return n_; }
  bool has_matrix() const { return has_matrix_; }

  const Matrix& matrix() const {
    require_matrix();
    return matrix_;
  }

  const Matrix& inverse_matrix() const {
    require_matrix();
    return inverse_;
  }

  // Named kinds are unitary by construction; custom is checked numerically.
  bool is_unitary(Real tol = Real(1e-12)) const {
    if (kind_ != TransformKind::custom) return true;
    const Matrix gram = matrix_.adjoint() * matrix_;
    return (gram - Matrix::Identity(n_, n_)).cwiseAbs().maxCoeff() <= tol;
  }

  // True when M^H M = c I for some c > 0 (the class of transforms for which
  // the decomposition optimality results hold).
  bool is_unitary_multiple(Real tol = Real(1e-10)) const {
    if (kind_ != TransformKind::custom) return true;
    const Matrix gram = matrix_.adjoint() * matrix_;
    const Scalar c = gram.trace() / static_cast<Real>(n_);
    if (!(c.real() > Real(0)) || std::abs(c.imag()) > tol * std::abs(c))
      return false;
    const Real residual = (gram - c * Matrix::Identity(n_, n_)).norm();
    return residual <= tol * std::max(Real(1), std::abs(c)) *
                           std::sqrt(static_cast<Real>(n_));
  }

  Vector apply(const Vector& x, Direction dir) const {
    if (x.size() != n_)
      throw std::invalid_argument("tube length does not match transform size");
    switch (kind_) {
      case TransformKind::identity:
        return x;
      case TransformKind::custom:
        return dir == Direction::forward ? matrix_ * x : inverse_ * x;
      case TransformKind::dft_unitary:
        if (has_matrix_)
          return dir == Direction::forward ? matrix_ * x : inverse_ * x;
        return detail::dft_unitary_fast<Real>(x, dir);
      case TransformKind::dct2_orthonormal:
        if (has_matrix_)
          return dir == Direction::forward ? matrix_ * x : inverse_ * x;
        return detail::dct2_ortho_fast<Real>(x, dir);
    }
    throw std::logic_error("unreachable transform kind");
  }

 private:
  TransformSpecT(TransformKind kind, Index n) : kind_(kind), n_(n) {}

  static void require_size(Index n) {
    if (n < 1) throw std::invalid_argument("transform size must be positive");
  }

  void require_matrix() const {
    if (!has_matrix_)
      throw std::logic_error(
          "transform has no explicit matrix (fast-path length)");
  }

  TransformKind kind_;
  Index n_;
  Matrix matrix_;
  Matrix inverse_;
  bool has_matrix_ = false;
};

using TransformSpec = TransformSpecT<double>;

template <typename Real>
Eigen::Vector<std::complex<Real>, Eigen::Dynamic> forward_tube(
    const Eigen::Vector<std::complex<Real>, Eigen::Dynamic>& x,
    const TransformSpecT<Real>& spec) {
  return spec.apply(x, Direction::forward);
}

template <typename Real>
Eigen::Vector<std::complex<Real>, Eigen::Dynamic> inverse_tube(
    const Eigen::Vector<std::complex<Real>, Eigen::Dynamic>& xhat,
    const TransformSpecT<Real>& spec) {
  return spec.apply(xhat, Direction::inverse);
}

// x *M y = M^-1 (Mx .* My).
template <typename Real>
Eigen::Vector<std::complex<Real>, Eigen::Dynamic> tube_mprod(
    const Eigen::Vector<std::complex<Real>, Eigen::Dynamic>& x,
    const Eigen::Vector<std::complex<Real>, Eigen::Dynamic>& y,
    const TransformSpecT<Real>& spec) {
  if (x.size() != y.size())
    throw std::invalid_argument("tube lengths differ");
  const auto xh = spec.apply(x, Direction::forward);
  const auto yh = spec.apply(y, Direction::forward);
  return spec.apply(xh.cwiseProduct(yh), Direction::inverse);
}

// The multiplicative identity of (C^n, *M): e = M^-1 1.
template <typename Real>
Eigen::Vector<std::complex<Real>, Eigen::Dynamic> unit_tube(
    const TransformSpecT<Real>& spec) {
  Eigen::Vector<std::complex<Real>, Eigen::Dynamic> ones =
      Eigen::Vector<std::complex<Real>, Eigen::Dynamic>::Ones(spec.size());
  return spec.apply(ones, Direction::inverse);
}

// Applies the transform along the tube mode of an m x p x n array given as
// n frontal slices. Tubes are independent; they may be processed in
// parallel in any order.
template <typename Real>
std::vector<Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>>
mode3_apply(
    const std::vector<
        Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>>&
        slices,
    const TransformSpecT<Real>& spec, Direction dir) {
  using Matrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic,
                               Eigen::Dynamic>;
  const Index n = static_cast<Index>(slices.size());
  if (n != spec.size())
    throw std::invalid_argument(
        "third dimension does not match transform size");
  const Index m = slices[0].rows();
  const Index p = slices[0].cols();
  for (const auto& s : slices)
    if (s.rows() != m || s.cols() != p)
      throw std::invalid_argument("frontal slices have inconsistent shapes");

  if (spec.kind() == TransformKind::identity) return slices;

  // Rows of B are flattened slices, so columns are tubes.
  Matrix b(n, m * p);
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < p; ++j) b(k, i * p + j) = slices[k](i, j);

  Matrix c(n, m * p);
  if (spec.has_matrix()) {
    c = (dir == Direction::forward ? spec.matrix() : spec.inverse_matrix()) *
        b;
  } else {
    detail::parallel_for(m * p, [&](std::int64_t col) {
      c.col(col) = spec.apply(b.col(col), dir);
    });
  }

  std::vector<Matrix> out(n, Matrix(m, p));
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < p; ++j) out[k](i, j) = c(k, i * p + j);
  return out;
}

}  // namespace qtt
