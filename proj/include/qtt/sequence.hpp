#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace qtt {

// A point is treated as real/non-negative up to this floating-point slack;
// strict positivity requires a real part above it.
inline constexpr double kPositivityTol = 1e-12;

// Spectrum of an eventually-constant sequence: the distinct entry values
// plus the tail value, with positivity classification.
template <typename Real>
struct SpectrumDescT {
  std::vector<std::complex<Real>> points;
  bool is_selfadjoint = false;
  bool is_nonneg = false;
  bool is_strictly_pos = false;
};

using SpectrumDesc = SpectrumDescT<double>;

// Eventually-constant complex sequence over Z: explicit values on the band
// [lo, lo + values.size()) and a constant tail everywhere else. This class
// is the computable closure of the transform-domain scalar algebra: it is
// closed under +, elementwise *, conjugation, sqrt, abs and inversion, it
// contains the square-summable ideal (tail 0) and the unit (tail 1), and
// every operation below re-canonicalizes so equality is structural.
// Instances are immutable values.
template <typename Real>
class EcSeqT {
 public:
  using Scalar = std::complex<Real>;

  EcSeqT() : lo_(0), tail_(0) {}

  static EcSeqT zero() { return EcSeqT(); }

  // The multiplicative unit: constant 1, empty band.
  static EcSeqT unit() { return constant(Scalar(1)); }

  static EcSeqT constant(Scalar c) {
    EcSeqT s;
    s.tail_ = c;
    return s;
  }

  // The j-th coordinate sequence: 1 at index j, 0 elsewhere (idempotent).
  static EcSeqT basis(std::int64_t j) {
    return from_band(j, {Scalar(1)}, Scalar(0));
  }

  static EcSeqT from_band(std::int64_t lo, std::vector<Scalar> values,
                          Scalar tail = Scalar(0)) {
    EcSeqT s;
    s.lo_ = lo;
    s.values_ = std::move(values);
    s.tail_ = tail;
    s.canonicalize();
    return s;
  }

  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return lo_ + static_cast<std::int64_t>(values_.size()) - 1; }
  std::size_t band_size() const { return values_.size(); }
  bool band_empty() const { return values_.empty(); }
  const std::vector<Scalar>& values() const { return values_; }
  Scalar tail() const { return tail_; }

  Scalar at(std::int64_t k) const {
    if (values_.empty() || k < lo_ || k > hi()) return tail_;
    return values_[static_cast<std::size_t>(k - lo_)];
  }

  bool operator==(const EcSeqT& other) const = default;

 private:
  // Canonical form: boundary values differ from the tail; the empty band
  // sits at lo = 0 so that equality is structural.
  void canonicalize() {
    std::size_t begin = 0;
    std::size_t end = values_.size();
    while (begin < end && values_[begin] == tail_) ++begin;
    while (end > begin && values_[end - 1] == tail_) --end;
    if (begin > 0 || end < values_.size()) {
      values_ = std::vector<Scalar>(values_.begin() + begin,
                                    values_.begin() + end);
      lo_ += static_cast<std::int64_t>(begin);
    }
    if (values_.empty()) lo_ = 0;
  }

  std::int64_t lo_;
  std::vector<Scalar> values_;
  Scalar tail_;
};

using EcSeq = EcSeqT<double>;

namespace detail {

template <typename Real, typename F>
EcSeqT<Real> pointwise(const EcSeqT<Real>& a, const EcSeqT<Real>& b, F op) {
  using Scalar = std::complex<Real>;
  const Scalar tail = op(a.tail(), b.tail());
  if (a.band_empty() && b.band_empty())
    return EcSeqT<Real>::from_band(0, {}, tail);
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
  std::vector<Scalar> values(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t k = lo; k <= hi; ++k)
    values[static_cast<std::size_t>(k - lo)] = op(a.at(k), b.at(k));
  return EcSeqT<Real>::from_band(lo, std::move(values), tail);
}

template <typename Real, typename F>
EcSeqT<Real> pointwise(const EcSeqT<Real>& a, F op) {
  using Scalar = std::complex<Real>;
  std::vector<Scalar> values(a.band_size());
  for (std::size_t i = 0; i < a.band_size(); ++i) values[i] = op(a.values()[i]);
  return EcSeqT<Real>::from_band(a.lo(), std::move(values), op(a.tail()));
}

}  // namespace detail

template <typename Real>
EcSeqT<Real> operator+(const EcSeqT<Real>& a, const EcSeqT<Real>& b) {
  using Scalar = std::complex<Real>;
  return detail::pointwise(a, b, [](Scalar x, Scalar y) { return x + y; });
}

template <typename Real>
EcSeqT<Real> operator-(const EcSeqT<Real>& a, const EcSeqT<Real>& b) {
  using Scalar = std::complex<Real>;
  return detail::pointwise(a, b, [](Scalar x, Scalar y) { return x - y; });
}

// Elementwise product: the transform-domain realization of the tube product.
template <typename Real>
EcSeqT<Real> operator*(const EcSeqT<Real>& a, const EcSeqT<Real>& b) {
  using Scalar = std::complex<Real>;
  return detail::pointwise(a, b, [](Scalar x, Scalar y) { return x * y; });
}

template <typename Real>
EcSeqT<Real> operator*(std::complex<Real> alpha, const EcSeqT<Real>& a) {
  using Scalar = std::complex<Real>;
  return detail::pointwise(a, [alpha](Scalar x) { return alpha * x; });
}

template <typename Real>
EcSeqT<Real> operator*(const EcSeqT<Real>& a, std::complex<Real> alpha) {
  return alpha * a;
}

template <typename Real>
EcSeqT<Real> operator*(Real alpha, const EcSeqT<Real>& a) {
  return std::complex<Real>(alpha) * a;
}

template <typename Real>
EcSeqT<Real> operator-(const EcSeqT<Real>& a) {
  return std::complex<Real>(Real(-1)) * a;
}

template <typename Real>
EcSeqT<Real> conj(const EcSeqT<Real>& a) {
  using Scalar = std::complex<Real>;
  return detail::pointwise(a, [](Scalar x) { return std::conj(x); });
}

// The uniform norm, which is also the quasitube operator norm.
template <typename Real>
Real sup_norm(const EcSeqT<Real>& a) {
  Real m = std::abs(a.tail());
  for (const auto& v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

// The Hilbert-space norm. Sequences with a nonzero tail are not
// square-summable; they signal nullopt instead of a value.
template <typename Real>
std::optional<Real> l2_norm(const EcSeqT<Real>& a) {
  if (a.tail() != std::complex<Real>(0)) return std::nullopt;
  Real sum = 0;
  for (const auto& v : a.values()) sum += std::norm(v);
  return std::sqrt(sum);
}

template <typename Real>
SpectrumDescT<Real> spectrum(const EcSeqT<Real>& a) {
  using Scalar = std::complex<Real>;
  SpectrumDescT<Real> desc;
  auto push = [&desc](Scalar z) {
    if (std::find(desc.points.begin(), desc.points.end(), z) ==
        desc.points.end())
      desc.points.push_back(z);
  };
  for (const auto& v : a.values()) push(v);
  push(a.tail());
  const Real tol = Real(kPositivityTol);
  desc.is_selfadjoint = true;
  desc.is_nonneg = true;
  desc.is_strictly_pos = true;
  for (const auto& z : desc.points) {
    if (std::abs(z.imag()) > tol) {
      desc.is_selfadjoint = false;
      desc.is_nonneg = false;
      desc.is_strictly_pos = false;
    }
    if (z.real() < -tol) {
      desc.is_nonneg = false;
      desc.is_strictly_pos = false;
    }
    if (z.real() <= tol) desc.is_strictly_pos = false;
  }
  desc.is_nonneg = desc.is_nonneg && desc.is_selfadjoint;
  desc.is_strictly_pos = desc.is_strictly_pos && desc.is_nonneg;
  return desc;
}

// Partial order of the algebra: a >= b iff a - b has non-negative spectrum.
template <typename Real>
bool geq(const EcSeqT<Real>& a, const EcSeqT<Real>& b) {
  return spectrum(a - b).is_nonneg;
}

// Unique non-negative square root of a non-negative sequence.
template <typename Real>
EcSeqT<Real> sqrt_nonneg(const EcSeqT<Real>& a) {
  using Scalar = std::complex<Real>;
  if (!spectrum(a).is_nonneg)
    throw std::domain_error("sequence is not non-negative");
  return detail::pointwise(a, [](Scalar x) {
    return Scalar(std::sqrt(std::max(x.real(), Real(0))));
  });
}

// Square root of a self-adjoint sequence; negative entries map to the +i
// branch, i.e. x < 0 gives i * sqrt(|x|).
template <typename Real>
EcSeqT<Real> sqrt_selfadjoint(const EcSeqT<Real>& a) {
  using Scalar = std::complex<Real>;
  if (!spectrum(a).is_selfadjoint)
    throw std::domain_error("sequence is not self-adjoint");
  return detail::pointwise(a, [](Scalar x) {
    const Real r = x.real();
    if (r < 0) return Scalar(Real(0), std::sqrt(-r));
    return Scalar(std::sqrt(r));
  });
}

// Elementwise modulus, the square root of conj(a) * a.
template <typename Real>
EcSeqT<Real> abs(const EcSeqT<Real>& a) {
  using Scalar = std::complex<Real>;
  return detail::pointwise(a, [](Scalar x) { return Scalar(std::abs(x)); });
}

// Multiplicative inverse; defined only when the spectrum stays away from 0.
template <typename Real>
EcSeqT<Real> inverse(const EcSeqT<Real>& a) {
  using Scalar = std::complex<Real>;
  for (const auto& z : spectrum(a).points)
    if (std::abs(z) <= Real(kPositivityTol))
      throw std::domain_error("sequence is singular: spectrum contains zero");
  return detail::pointwise(a, [](Scalar x) { return Scalar(1) / x; });
}

// Dense view of the multiplication operator q -> a * q on a finite index
// window [window_lo, window_hi]: a diagonal matrix of sequence values.
template <typename Real>
Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>
multiplier_matrix(const EcSeqT<Real>& a, std::int64_t window_lo,
                  std::int64_t window_hi) {
  if (window_hi < window_lo)
    throw std::invalid_argument("multiplier window is empty");
  const Eigen::Index w = static_cast<Eigen::Index>(window_hi - window_lo + 1);
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic> m =
      Eigen::Matrix<std::complex<Real>, Eigen::Dynamic,
                    Eigen::Dynamic>::Zero(w, w);
  for (Eigen::Index i = 0; i < w; ++i) m(i, i) = a.at(window_lo + i);
  return m;
}

}  // namespace qtt
