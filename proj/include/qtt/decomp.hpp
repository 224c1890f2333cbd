#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <qtt/parallel.hpp>
#include <qtt/sequence.hpp>
#include <qtt/tensor.hpp>

namespace qtt {

// Relative floor under which a singular value counts as zero: sigma is kept
// when sigma > kRankRelTol * max(largest sigma of its slice, 1).
inline constexpr double kRankRelTol = 1e-10;

template <typename Real>
struct QSvdT {
  QtTensorT<Real> u;
  QtTensorT<Real> s;
  QtTensorT<Real> v;
};

using QSvd = QSvdT<double>;

// One rank-one atom of a decomposition: at frontal index t, the l-th
// singular triple (sigma, u column, v column) of that slice.
template <typename Real>
struct ComponentT {
  Real sigma = 0;
  std::int64_t l = 0;
  std::int64_t t = 0;
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> u;
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> v;
};

using Component = ComponentT<double>;

enum class Provenance { offline, streaming };

template <typename Real>
struct ComponentListT {
  std::vector<ComponentT<Real>> items;
  Provenance provenance = Provenance::offline;
};

using ComponentList = ComponentListT<double>;

namespace detail {

// Descending sigma; ties resolved by frontal index first, lateral second,
// both ascending.
template <typename Real>
bool component_precedes(const ComponentT<Real>& a, const ComponentT<Real>& b) {
  if (a.sigma != b.sigma) return a.sigma > b.sigma;
  if (a.t != b.t) return a.t < b.t;
  return a.l < b.l;
}

template <typename Real>
struct SliceSvd {
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic> u, s, v;
};

// Full SVD of one slice with a deterministic phase convention: the first
// sizeable entry of each u column is rotated to the positive real axis and
// the matching v column absorbs the same unit factor, which leaves
// u * s * v^H unchanged. Exactly zero slices get the pinned factorization
// (I, 0, I) so factors never depend on SVD library behavior at zero.
template <typename Real>
SliceSvd<Real> slice_svd(
    const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>&
        a) {
  using Matrix =
      Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index m = a.rows();
  const Eigen::Index p = a.cols();
  if (a.isZero(Real(0)))
    return {Matrix::Identity(m, m), Matrix::Zero(m, p),
            Matrix::Identity(p, p)};
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix u = svd.matrixU();
  Matrix v = svd.matrixV();
  auto fix_phase = [](Matrix& w, Matrix* partner, Eigen::Index j) {
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      if (std::abs(w(i, j)) > Real(1e-8)) {
        pivot = i;
        break;
      }
    const std::complex<Real> entry = w(pivot, j);
    if (entry == std::complex<Real>(0)) return;
    const std::complex<Real> c = std::conj(entry) / std::abs(entry);
    w.col(j) *= c;
    if (partner && j < partner->cols()) partner->col(j) *= c;
  };
  for (Eigen::Index j = 0; j < m; ++j) fix_phase(u, &v, j);
  for (Eigen::Index j = std::min(m, p); j < p; ++j) fix_phase(v, nullptr, j);
  Matrix s = Matrix::Zero(m, p);
  const auto& sig = svd.singularValues();
  for (Eigen::Index j = 0; j < sig.size(); ++j) s(j, j) = sig(j);
  return {std::move(u), std::move(s), std::move(v)};
}

inline std::int64_t slice_rank(const Eigen::MatrixXcd& s_slice,
                               double rel_tol) {
  const Eigen::Index k = std::min(s_slice.rows(), s_slice.cols());
  const double top = k > 0 ? s_slice(0, 0).real() : 0.0;
  const double floor = rel_tol * std::max(top, 1.0);
  std::int64_t r = 0;
  for (Eigen::Index j = 0; j < k; ++j)
    if (s_slice(j, j).real() > floor) ++r;
  return r;
}

}  // namespace detail

// Facewise SVD: every band slice and the tail slice get a full matrix SVD,
// giving star-unitary u, v and an f-diagonal s with descending diagonal
// sequences.
template <typename Real>
QSvdT<Real> qsvd(const QtTensorT<Real>& x) {
  using Matrix = typename QtTensorT<Real>::Matrix;
  if (!x.tail_slice().allFinite())
    throw std::runtime_error("slice SVD failed at the tail slice");
  const auto tail = detail::slice_svd<Real>(x.tail_slice());
  const std::int64_t nb = static_cast<std::int64_t>(x.band_size());
  std::vector<Matrix> ub(x.band_size()), sb(x.band_size()), vb(x.band_size());
  detail::parallel_for(nb, [&](std::int64_t i) {
    const Matrix& a = x.band()[static_cast<std::size_t>(i)];
    if (!a.allFinite())
      throw std::runtime_error("slice SVD failed at frontal index " +
                               std::to_string(x.lo() + i));
    auto f = detail::slice_svd<Real>(a);
    ub[static_cast<std::size_t>(i)] = std::move(f.u);
    sb[static_cast<std::size_t>(i)] = std::move(f.s);
    vb[static_cast<std::size_t>(i)] = std::move(f.v);
  });
  return {QtTensorT<Real>::from_slices(x.lo(), std::move(ub), tail.u),
          QtTensorT<Real>::from_slices(x.lo(), std::move(sb), tail.s),
          QtTensorT<Real>::from_slices(x.lo(), std::move(vb), tail.v)};
}

template <typename Real>
struct TSvdFiniteT {
  FiniteTubalTensorT<Real> u;
  FiniteTubalTensorT<Real> s;
  FiniteTubalTensorT<Real> v;
  // Truncations of this factorization are optimal only when the transform
  // is a nonzero multiple of a unitary matrix.
  bool eckart_young_guarantee = false;
};

using TSvdFinite = TSvdFiniteT<double>;

// Finite tensor SVD under the tensor's transform: move to the transform
// domain, factor each slice, move back.
template <typename Real>
TSvdFiniteT<Real> tsvd_finite(const FiniteTubalTensorT<Real>& x) {
  using Matrix = typename FiniteTubalTensorT<Real>::Matrix;
  const auto xh = mode3_apply(x.slices(), x.spec(), Direction::forward);
  const auto n = static_cast<std::int64_t>(xh.size());
  std::vector<Matrix> uh(xh.size()), sh(xh.size()), vh(xh.size());
  detail::parallel_for(n, [&](std::int64_t k) {
    const Matrix& a = xh[static_cast<std::size_t>(k)];
    if (!a.allFinite())
      throw std::runtime_error("slice SVD failed at frontal index " +
                               std::to_string(k));
    auto f = detail::slice_svd<Real>(a);
    uh[static_cast<std::size_t>(k)] = std::move(f.u);
    sh[static_cast<std::size_t>(k)] = std::move(f.s);
    vh[static_cast<std::size_t>(k)] = std::move(f.v);
  });
  return {FiniteTubalTensorT<Real>(
              mode3_apply(uh, x.spec(), Direction::inverse), x.spec()),
          FiniteTubalTensorT<Real>(
              mode3_apply(sh, x.spec(), Direction::inverse), x.spec()),
          FiniteTubalTensorT<Real>(
              mode3_apply(vh, x.spec(), Direction::inverse), x.spec()),
          x.spec().is_unitary_multiple()};
}

// Slice-wise numerical rank as an integer-valued sequence.
template <typename Real>
EcSeqT<Real> multirank(const QSvdT<Real>& f, double rel_tol = kRankRelTol) {
  std::vector<std::complex<Real>> values(f.s.band_size());
  for (std::size_t i = 0; i < f.s.band_size(); ++i)
    values[i] = std::complex<Real>(
        static_cast<Real>(detail::slice_rank(f.s.band()[i], rel_tol)));
  return EcSeqT<Real>::from_band(
      f.s.lo(), std::move(values),
      std::complex<Real>(static_cast<Real>(
          detail::slice_rank(f.s.tail_slice(), rel_tol))));
}

template <typename Real>
EcSeqT<Real> multirank(const QtTensorT<Real>& x,
                       double rel_tol = kRankRelTol) {
  return multirank(qsvd(x), rel_tol);
}

// Number of nonzero singular sequences; equals the largest multirank value.
template <typename Real>
std::int64_t qrank(const QSvdT<Real>& f, double rel_tol = kRankRelTol) {
  const EcSeqT<Real> rho = multirank(f, rel_tol);
  std::int64_t r = static_cast<std::int64_t>(rho.tail().real());
  for (const auto& v : rho.values())
    r = std::max(r, static_cast<std::int64_t>(v.real()));
  return r;
}

// Number of nonzero (lateral, frontal) singular pairs. A nonzero tail
// sigma repeats at infinitely many frontal indices, signalled as nullopt.
template <typename Real>
std::optional<std::int64_t> implicit_rank(const QSvdT<Real>& f,
                                          double rel_tol = kRankRelTol) {
  if (detail::slice_rank(f.s.tail_slice(), rel_tol) > 0) return std::nullopt;
  std::int64_t count = 0;
  for (const auto& s : f.s.band()) count += detail::slice_rank(s, rel_tol);
  return count;
}

template <typename Real>
std::optional<std::int64_t> rank_f(const QtTensorT<Real>& x,
                                   double rel_tol = kRankRelTol) {
  return implicit_rank(qsvd(x), rel_tol);
}

namespace detail {

inline std::int64_t integer_rank_value(std::complex<double> v,
                                       std::int64_t max_rank) {
  const double rounded = std::nearbyint(v.real());
  if (std::abs(v.imag()) > 1e-9 || std::abs(v.real() - rounded) > 1e-9)
    throw std::invalid_argument("rank sequence must be integer-valued");
  if (rounded < 0 || rounded > static_cast<double>(max_rank))
    throw std::invalid_argument("rank out of range");
  return static_cast<std::int64_t>(rounded);
}

}  // namespace detail

// Keep the leading rho_k singular triples of every slice.
template <typename Real>
QtTensorT<Real> truncate_multirank(const QSvdT<Real>& f,
                                   const EcSeqT<Real>& rho) {
  using Matrix = typename QtTensorT<Real>::Matrix;
  const Eigen::Index m = f.u.m();
  const Eigen::Index p = f.v.m();
  const std::int64_t max_rank = std::min(m, p);
  detail::integer_rank_value(rho.tail(), max_rank);
  for (const auto& v : rho.values()) detail::integer_rank_value(v, max_rank);

  auto cut = [&](std::int64_t k) -> Matrix {
    const std::int64_t r = detail::integer_rank_value(rho.at(k), max_rank);
    if (r == 0) return Matrix::Zero(m, p);
    return f.u.slice(k).leftCols(r) *
           f.s.slice(k).topLeftCorner(r, r) *
           f.v.slice(k).leftCols(r).adjoint();
  };

  std::int64_t lo = 0;
  std::int64_t hi = -1;
  bool any = false;
  auto widen = [&](std::int64_t a, std::int64_t b, bool empty) {
    if (empty) return;
    if (!any) {
      lo = a;
      hi = b;
      any = true;
    } else {
      lo = std::min(lo, a);
      hi = std::max(hi, b);
    }
  };
  widen(f.s.lo(), f.s.hi(), f.s.band_empty());
  widen(f.u.lo(), f.u.hi(), f.u.band_empty());
  widen(f.v.lo(), f.v.hi(), f.v.band_empty());
  widen(rho.lo(), rho.hi(), rho.band_empty());

  // Outside every band all factors are constant, so one tail evaluation
  // covers the rest of the axis. Pick an index beyond the union band.
  const Matrix tail = cut(any ? hi + 1 : 0);
  if (!any) return QtTensorT<Real>::from_slices(0, {}, tail);
  std::vector<Matrix> slices(static_cast<std::size_t>(hi - lo + 1));
  detail::parallel_for(hi - lo + 1, [&](std::int64_t i) {
    slices[static_cast<std::size_t>(i)] = cut(lo + i);
  });
  return QtTensorT<Real>::from_slices(lo, std::move(slices), tail);
}

template <typename Real>
QtTensorT<Real> truncate_qrank(const QSvdT<Real>& f, std::int64_t r) {
  return truncate_multirank(
      f, EcSeqT<Real>::constant(std::complex<Real>(static_cast<Real>(r))));
}

// All components above the numerical floor, globally ordered. With a finite
// limit, stops after `limit` components; with nullopt, returns every finite
// component, which requires a zero-tail tensor. A nonzero tail sigma lives
// at infinitely many frontal indices, so any request that would reach it
// has no well-defined answer and is rejected.
template <typename Real>
ComponentListT<Real> order_components(const QSvdT<Real>& f,
                                      std::optional<std::int64_t> limit,
                                      double rel_tol = kRankRelTol) {
  const Eigen::Index rank_cap = std::min(f.u.m(), f.v.m());
  std::vector<ComponentT<Real>> items;
  for (std::int64_t k = f.s.lo(); k <= f.s.hi() && !f.s.band_empty(); ++k) {
    const auto& s = f.s.slice(k);
    const double top = s(0, 0).real();
    const double floor = rel_tol * std::max(top, 1.0);
    for (Eigen::Index j = 0; j < rank_cap; ++j) {
      const double sigma = s(j, j).real();
      if (sigma <= floor) break;
      ComponentT<Real> c;
      c.sigma = static_cast<Real>(sigma);
      c.l = j;
      c.t = k;
      c.u = f.u.slice(k).col(j);
      c.v = f.v.slice(k).col(j);
      items.push_back(std::move(c));
    }
  }
  std::sort(items.begin(), items.end(), detail::component_precedes<Real>);

  double tail_top = 0;
  const auto& st = f.s.tail_slice();
  const double tail_floor =
      rel_tol * std::max(st.rows() > 0 ? st(0, 0).real() : 0.0, 1.0);
  for (Eigen::Index j = 0; j < rank_cap; ++j)
    tail_top = std::max(tail_top, st(j, j).real());
  const bool tail_alive = tail_top > tail_floor;

  if (!limit.has_value()) {
    if (tail_alive)
      throw std::domain_error(
          "component set is infinite: constant tail has nonzero sigma");
    return {std::move(items), Provenance::offline};
  }
  const std::int64_t q = *limit;
  if (q < 0) throw std::invalid_argument("component limit must be >= 0");
  if (tail_alive &&
      (static_cast<std::int64_t>(items.size()) < q ||
       (q > 0 && items[static_cast<std::size_t>(q - 1)].sigma <= tail_top)))
    throw std::domain_error(
        "component request reaches the constant tail, which has no leading "
        "frontal index");
  if (static_cast<std::int64_t>(items.size()) > q) items.resize(static_cast<std::size_t>(q));
  return {std::move(items), Provenance::offline};
}

template <typename Real>
struct ExplicitTruncationT {
  QtTensorT<Real> tensor;
  ComponentListT<Real> components;
};

using ExplicitTruncation = ExplicitTruncationT<double>;

// Sum of the q leading rank-one atoms sigma * u v^H placed at their frontal
// indices. This is the best approximation among all tensors whose image has
// dimension at most q.
template <typename Real>
ExplicitTruncationT<Real> truncate_explicit(const QSvdT<Real>& f,
                                            std::int64_t q,
                                            double rel_tol = kRankRelTol) {
  using Matrix = typename QtTensorT<Real>::Matrix;
  const Eigen::Index m = f.u.m();
  const Eigen::Index p = f.v.m();
  if (!f.s.tail_slice().isZero(Real(0)))
    throw std::domain_error(
        "explicit truncation requires a tensor with zero tail");
  if (q < 0) throw std::invalid_argument("component count must be >= 0");

  ComponentListT<Real> comps = order_components(f, q, rel_tol);
  if (comps.items.empty())
    return {QtTensorT<Real>::zero(m, p), std::move(comps)};

  std::int64_t lo = comps.items[0].t;
  std::int64_t hi = comps.items[0].t;
  for (const auto& c : comps.items) {
    lo = std::min(lo, c.t);
    hi = std::max(hi, c.t);
  }
  std::vector<Matrix> slices(static_cast<std::size_t>(hi - lo + 1),
                             Matrix::Zero(m, p));
  for (const auto& c : comps.items)
    slices[static_cast<std::size_t>(c.t - lo)] +=
        std::complex<Real>(c.sigma) * (c.u * c.v.adjoint());
  return {QtTensorT<Real>::from_slices(lo, std::move(slices),
                                       Matrix::Zero(m, p)),
          std::move(comps)};
}

}  // namespace qtt
