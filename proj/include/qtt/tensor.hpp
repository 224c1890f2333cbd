#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <qtt/parallel.hpp>
#include <qtt/random.hpp>
#include <qtt/sequence.hpp>
#include <qtt/transform.hpp>

namespace qtt {

namespace detail {

template <typename Matrix>
bool mat_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a.array() == b.array()).all();
}

}  // namespace detail

// Largest singular value. Dense SVD for small slices; power iteration on
// A^H A (relative tolerance 1e-12, at most 10 * min(m, p) sweeps) above the
// crossover, since the library targets modest slice sizes with wide bands.
template <typename Real>
Real spectral_norm(
    const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>&
        a) {
  using Matrix =
      Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
  const Eigen::Index small = std::min(a.rows(), a.cols());
  if (small == 0) return Real(0);
  if (small <= 64) return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);

  SplitMix64 rng(0x5eed5eed5eed5eedULL);
  Vector v(a.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = std::complex<Real>(Real(rng.normal()), Real(rng.normal()));
  v.normalize();
  Real sigma = 0;
  const std::int64_t max_iters = 10 * static_cast<std::int64_t>(small);
  for (std::int64_t it = 0; it < max_iters; ++it) {
    Vector w = a * v;
    const Real s = w.norm();
    if (s == Real(0)) return Real(0);
    v = a.adjoint() * w;
    const Real n = v.norm();
    if (n == Real(0)) return s;
    v /= n;
    if (std::abs(s - sigma) <= Real(1e-12) * std::max(Real(1), s)) {
      sigma = s;
      break;
    }
    sigma = s;
  }
  return sigma;
}

// Quasitubal tensor: an m x p matrix of eventually-constant sequences,
// stored frontally as transform-domain slices on [lo, lo + band) plus one
// tail slice repeated at every other frontal index. Canonical form mirrors
// EcSeqT: boundary slices differ from the tail slice and the empty band
// sits at lo = 0, so equality is structural. Instances are immutable.
template <typename Real>
class QtTensorT {
 public:
  using Scalar = std::complex<Real>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  static QtTensorT zero(Eigen::Index m, Eigen::Index p) {
    return from_slices(0, {}, Matrix::Zero(m, p));
  }

  static QtTensorT from_slices(std::int64_t lo, std::vector<Matrix> slices,
                               Matrix tail_slice) {
    if (tail_slice.rows() < 1 || tail_slice.cols() < 1)
      throw std::invalid_argument("tensor slices must be non-empty");
    for (const auto& s : slices)
      if (s.rows() != tail_slice.rows() || s.cols() != tail_slice.cols())
        throw std::invalid_argument("tensor slices must share one shape");
    QtTensorT x;
    x.lo_ = lo;
    x.slices_ = std::move(slices);
    x.tail_ = std::move(tail_slice);
    x.canonicalize();
    return x;
  }

  Eigen::Index m() const { return tail_.rows(); }
  Eigen::Index p() const { return tail_.cols(); }
  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const {
    return lo_ + static_cast<std::int64_t>(slices_.size()) - 1;
  }
  std::size_t band_size() const { return slices_.size(); }
  bool band_empty() const { return slices_.empty(); }
  const std::vector<Matrix>& band() const { return slices_; }
  const Matrix& tail_slice() const { return tail_; }

  const Matrix& slice(std::int64_t k) const {
    if (slices_.empty() || k < lo_ || k > hi()) return tail_;
    return slices_[static_cast<std::size_t>(k - lo_)];
  }

  // The (i, j) entry along the frontal axis; agrees with slice(k)(i, j)
  // at every k.
  EcSeqT<Real> entry(Eigen::Index i, Eigen::Index j) const {
    std::vector<Scalar> values(slices_.size());
    for (std::size_t s = 0; s < slices_.size(); ++s) values[s] = slices_[s](i, j);
    return EcSeqT<Real>::from_band(lo_, std::move(values), tail_(i, j));
  }

  bool operator==(const QtTensorT& other) const {
    if (lo_ != other.lo_ || slices_.size() != other.slices_.size())
      return false;
    if (!detail::mat_equal(tail_, other.tail_)) return false;
    for (std::size_t s = 0; s < slices_.size(); ++s)
      if (!detail::mat_equal(slices_[s], other.slices_[s])) return false;
    return true;
  }

 private:
  QtTensorT() : lo_(0) {}

  void canonicalize() {
    std::size_t begin = 0;
    std::size_t end = slices_.size();
    while (begin < end && detail::mat_equal(slices_[begin], tail_)) ++begin;
    while (end > begin && detail::mat_equal(slices_[end - 1], tail_)) --end;
    if (begin > 0 || end < slices_.size()) {
      slices_ = std::vector<Matrix>(slices_.begin() + begin,
                                    slices_.begin() + end);
      lo_ += static_cast<std::int64_t>(begin);
    }
    if (slices_.empty()) lo_ = 0;
  }

  std::int64_t lo_;
  std::vector<Matrix> slices_;
  Matrix tail_;
};

using QtTensor = QtTensorT<double>;

namespace detail {

template <typename Real, typename F>
QtTensorT<Real> facewise(const QtTensorT<Real>& a, const QtTensorT<Real>& b,
                         F op) {
  using Matrix = typename QtTensorT<Real>::Matrix;
  Matrix tail = op(a.tail_slice(), b.tail_slice());
  if (a.band_empty() && b.band_empty())
    return QtTensorT<Real>::from_slices(0, {}, std::move(tail));
  std::int64_t lo, hi;
  if (a.band_empty()) {
    lo = b.lo();
    hi = b.hi();
  } else if (b.band_empty()) {
    lo = a.lo();
    hi = a.hi();
  } else {
    lo = std::min(a.lo(), b.lo());
    hi = std::max(a.hi(), b.hi());
  }
  std::vector<Matrix> slices(static_cast<std::size_t>(hi - lo + 1));
  parallel_for(hi - lo + 1, [&](std::int64_t i) {
    slices[static_cast<std::size_t>(i)] = op(a.slice(lo + i), b.slice(lo + i));
  });
  return QtTensorT<Real>::from_slices(lo, std::move(slices), std::move(tail));
}

template <typename Real, typename F>
QtTensorT<Real> facewise(const QtTensorT<Real>& a, F op) {
  using Matrix = typename QtTensorT<Real>::Matrix;
  std::vector<Matrix> slices(a.band_size());
  for (std::size_t s = 0; s < a.band_size(); ++s) slices[s] = op(a.band()[s]);
  return QtTensorT<Real>::from_slices(a.lo(), std::move(slices),
                                      op(a.tail_slice()));
}

}  // namespace detail

// Identity tensor: I_p at every frontal index (empty band, identity tail).
template <typename Real = double>
QtTensorT<Real> qt_identity(Eigen::Index p) {
  if (p < 1) throw std::invalid_argument("identity size must be positive");
  return QtTensorT<Real>::from_slices(0, {},
                                      QtTensorT<Real>::Matrix::Identity(p, p));
}

// Facewise tensor-tensor product: matrix products slice by slice.
template <typename Real>
QtTensorT<Real> qt_prod(const QtTensorT<Real>& x, const QtTensorT<Real>& y) {
  using Matrix = typename QtTensorT<Real>::Matrix;
  if (x.p() != y.m())
    throw std::invalid_argument("tensor product: inner dimensions differ");
  return detail::facewise(
      x, y, [](const Matrix& a, const Matrix& b) -> Matrix { return a * b; });
}

template <typename Real>
QtTensorT<Real> qt_conj_transpose(const QtTensorT<Real>& x) {
  using Matrix = typename QtTensorT<Real>::Matrix;
  return detail::facewise(
      x, [](const Matrix& a) -> Matrix { return a.adjoint(); });
}

template <typename Real>
QtTensorT<Real> operator+(const QtTensorT<Real>& x, const QtTensorT<Real>& y) {
  using Matrix = typename QtTensorT<Real>::Matrix;
  if (x.m() != y.m() || x.p() != y.p())
    throw std::invalid_argument("tensor sum: shapes differ");
  return detail::facewise(
      x, y, [](const Matrix& a, const Matrix& b) -> Matrix { return a + b; });
}

template <typename Real>
QtTensorT<Real> operator-(const QtTensorT<Real>& x, const QtTensorT<Real>& y) {
  using Matrix = typename QtTensorT<Real>::Matrix;
  if (x.m() != y.m() || x.p() != y.p())
    throw std::invalid_argument("tensor difference: shapes differ");
  return detail::facewise(
      x, y, [](const Matrix& a, const Matrix& b) -> Matrix { return a - b; });
}

template <typename Real>
QtTensorT<Real> operator*(std::complex<Real> alpha, const QtTensorT<Real>& x) {
  using Matrix = typename QtTensorT<Real>::Matrix;
  return detail::facewise(
      x, [alpha](const Matrix& a) -> Matrix { return alpha * a; });
}

template <typename Real>
QtTensorT<Real> operator*(Real alpha, const QtTensorT<Real>& x) {
  return std::complex<Real>(alpha) * x;
}

template <typename Real>
QtTensorT<Real> operator-(const QtTensorT<Real>& x) {
  return std::complex<Real>(Real(-1)) * x;
}

// Hilbert-space norm, finite exactly on the zero-tail subspace.
template <typename Real>
std::optional<Real> qt_h_norm(const QtTensorT<Real>& x) {
  if (!x.tail_slice().isZero(Real(0))) return std::nullopt;
  Real sum = 0;
  for (const auto& s : x.band()) sum += s.squaredNorm();
  return std::sqrt(sum);
}

// Operator norm: the largest slice spectral norm, tail included.
template <typename Real>
Real qt_op_norm(const QtTensorT<Real>& x) {
  const std::int64_t n = static_cast<std::int64_t>(x.band_size());
  std::vector<Real> norms(static_cast<std::size_t>(n));
  detail::parallel_for(n, [&](std::int64_t i) {
    norms[static_cast<std::size_t>(i)] =
        spectral_norm<Real>(x.band()[static_cast<std::size_t>(i)]);
  });
  Real m = spectral_norm<Real>(x.tail_slice());
  for (Real v : norms) m = std::max(m, v);
  return m;
}

template <typename Real>
EcSeqT<Real> qt_trace(const QtTensorT<Real>& x) {
  if (x.m() != x.p()) throw std::invalid_argument("trace requires a square tensor");
  std::vector<std::complex<Real>> values(x.band_size());
  for (std::size_t s = 0; s < x.band_size(); ++s)
    values[s] = x.band()[s].trace();
  return EcSeqT<Real>::from_band(x.lo(), std::move(values),
                                 x.tail_slice().trace());
}

// Algebra-valued inner product Tr(X* prod Y) of the module of lateral slices.
template <typename Real>
EcSeqT<Real> qt_gram_inner(const QtTensorT<Real>& x, const QtTensorT<Real>& y) {
  if (x.m() != y.m() || x.p() != y.p())
    throw std::invalid_argument("gram inner product: shapes differ");
  return qt_trace(qt_prod(qt_conj_transpose(x), y));
}

// Hilbert-space inner product, conjugate-linear in the first argument.
// Defined only for zero-tail tensors.
template <typename Real>
std::complex<Real> qt_h_inner(const QtTensorT<Real>& x,
                              const QtTensorT<Real>& y) {
  if (x.m() != y.m() || x.p() != y.p())
    throw std::invalid_argument("inner product: shapes differ");
  if (!x.tail_slice().isZero(Real(0)) || !y.tail_slice().isZero(Real(0)))
    throw std::domain_error("inner product requires zero-tail tensors");
  std::complex<Real> sum = 0;
  if (x.band_empty() && y.band_empty()) return sum;
  const std::int64_t lo = std::min(x.band_empty() ? y.lo() : x.lo(),
                                   y.band_empty() ? x.lo() : y.lo());
  const std::int64_t hi = std::max(x.band_empty() ? y.hi() : x.hi(),
                                   y.band_empty() ? x.hi() : y.hi());
  for (std::int64_t k = lo; k <= hi; ++k)
    sum += x.slice(k).conjugate().cwiseProduct(y.slice(k)).sum();
  return sum;
}

template <typename Real>
bool qt_is_f_diagonal(const QtTensorT<Real>& x, Real tol = Real(1e-10)) {
  auto diagonal = [tol](const typename QtTensorT<Real>::Matrix& s) {
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      for (Eigen::Index j = 0; j < s.cols(); ++j)
        if (i != j && std::abs(s(i, j)) > tol) return false;
    return true;
  };
  if (!diagonal(x.tail_slice())) return false;
  for (const auto& s : x.band())
    if (!diagonal(s)) return false;
  return true;
}

template <typename Real>
bool qt_is_star_unitary(const QtTensorT<Real>& u, Real tol = Real(1e-10)) {
  using Matrix = typename QtTensorT<Real>::Matrix;
  if (u.m() != u.p())
    throw std::invalid_argument("unitarity requires a square tensor");
  const Matrix eye = Matrix::Identity(u.p(), u.p());
  auto near_identity = [&](const QtTensorT<Real>& x) {
    if ((x.tail_slice() - eye).cwiseAbs().maxCoeff() > tol) return false;
    for (const auto& s : x.band())
      if ((s - eye).cwiseAbs().maxCoeff() > tol) return false;
    return true;
  };
  const QtTensorT<Real> adj = qt_conj_transpose(u);
  return near_identity(qt_prod(adj, u)) && near_identity(qt_prod(u, adj));
}

// Finite third-order tensor in the spatial domain, carried together with
// the transform that defines its tube algebra.
template <typename Real>
class FiniteTubalTensorT {
 public:
  using Scalar = std::complex<Real>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  FiniteTubalTensorT(std::vector<Matrix> frontal_slices,
                     TransformSpecT<Real> spec)
      : slices_(std::move(frontal_slices)), spec_(std::move(spec)) {
    if (slices_.size() != static_cast<std::size_t>(spec_.size()))
      throw std::invalid_argument(
          "frontal slice count must equal the transform size");
    if (slices_.empty() || slices_[0].rows() < 1 || slices_[0].cols() < 1)
      throw std::invalid_argument("tensor slices must be non-empty");
    for (const auto& s : slices_)
      if (s.rows() != slices_[0].rows() || s.cols() != slices_[0].cols())
        throw std::invalid_argument("tensor slices must share one shape");
  }

  static FiniteTubalTensorT zero(Eigen::Index m, Eigen::Index p,
                                 TransformSpecT<Real> spec) {
    std::vector<Matrix> slices(static_cast<std::size_t>(spec.size()),
                               Matrix::Zero(m, p));
    return FiniteTubalTensorT(std::move(slices), std::move(spec));
  }

  Eigen::Index m() const { return slices_[0].rows(); }
  Eigen::Index p() const { return slices_[0].cols(); }
  Eigen::Index n() const { return static_cast<Eigen::Index>(slices_.size()); }
  const std::vector<Matrix>& slices() const { return slices_; }
  const TransformSpecT<Real>& spec() const { return spec_; }

  Vector tube(Eigen::Index i, Eigen::Index j) const {
    Vector t(n());
    for (Eigen::Index k = 0; k < n(); ++k) t(k) = slices_[static_cast<std::size_t>(k)](i, j);
    return t;
  }

  Real fro_norm() const {
    Real sum = 0;
    for (const auto& s : slices_) sum += s.squaredNorm();
    return std::sqrt(sum);
  }

 private:
  std::vector<Matrix> slices_;
  TransformSpecT<Real> spec_;
};

using FiniteTubalTensor = FiniteTubalTensorT<double>;

namespace detail {

template <typename Real>
bool same_spec(const TransformSpecT<Real>& a, const TransformSpecT<Real>& b) {
  if (a.kind() != b.kind() || a.size() != b.size()) return false;
  if (a.kind() == TransformKind::custom)
    return mat_equal(a.matrix(), b.matrix());
  return true;
}

}  // namespace detail

// Finite tensor-tensor product under the shared transform: move to the
// transform domain, multiply facewise, move back.
template <typename Real>
FiniteTubalTensorT<Real> finite_tprod(const FiniteTubalTensorT<Real>& x,
                                      const FiniteTubalTensorT<Real>& y) {
  using Matrix = typename FiniteTubalTensorT<Real>::Matrix;
  if (!detail::same_spec(x.spec(), y.spec()))
    throw std::invalid_argument("tensor product: transforms differ");
  if (x.p() != y.m())
    throw std::invalid_argument("tensor product: inner dimensions differ");
  const auto xh = mode3_apply(x.slices(), x.spec(), Direction::forward);
  const auto yh = mode3_apply(y.slices(), y.spec(), Direction::forward);
  std::vector<Matrix> zh(xh.size());
  detail::parallel_for(static_cast<std::int64_t>(xh.size()), [&](std::int64_t k) {
    zh[static_cast<std::size_t>(k)] = xh[static_cast<std::size_t>(k)] *
                                      yh[static_cast<std::size_t>(k)];
  });
  return FiniteTubalTensorT<Real>(
      mode3_apply(zh, x.spec(), Direction::inverse), x.spec());
}

// Multiplicative identity of the finite algebra for a given transform:
// identity matrices at every transform-domain slice.
template <typename Real>
FiniteTubalTensorT<Real> finite_identity(Eigen::Index p,
                                         const TransformSpecT<Real>& spec) {
  using Matrix = typename FiniteTubalTensorT<Real>::Matrix;
  std::vector<Matrix> slices(static_cast<std::size_t>(spec.size()),
                             Matrix::Identity(p, p));
  return FiniteTubalTensorT<Real>(
      mode3_apply(slices, spec, Direction::inverse), spec);
}

// Embed a finite tensor into the quasitubal algebra: its transform-domain
// slices become a band at the given frontal offset, with zero tail. Needs a
// unitary transform so that coefficients are orthonormal-basis coordinates
// and norms carry over.
template <typename Real>
QtTensorT<Real> finite_to_qt(const FiniteTubalTensorT<Real>& x,
                             std::int64_t frontal_offset = 0) {
  using Matrix = typename FiniteTubalTensorT<Real>::Matrix;
  if (!x.spec().is_unitary())
    throw std::invalid_argument("embedding requires a unitary transform");
  std::vector<Matrix> band = mode3_apply(x.slices(), x.spec(),
                                         Direction::forward);
  return QtTensorT<Real>::from_slices(frontal_offset, std::move(band),
                                      Matrix::Zero(x.m(), x.p()));
}

}  // namespace qtt
