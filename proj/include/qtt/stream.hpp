#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <qtt/decomp.hpp>
#include <qtt/tensor.hpp>

namespace qtt {

// Certificate slack: a leading sigma^2 must beat the out-of-band energy
// bound by more than this before a stage is accepted. The underlying
// inequality is strict, so near-ties keep growing the band instead.
inline constexpr double kCertifyTieTol = 1e-12;

// Lazily defined quasitubal tensor: frontal slices come from a callback,
// and the energy not yet seen is controlled either by the exact total
// H-norm squared or by a closed-form upper bound on the out-of-band energy.
template <typename Real>
class SliceOracleT {
 public:
  using Matrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
  using SliceFn = std::function<Matrix(std::int64_t)>;
  using TailFn = std::function<Real(std::int64_t)>;

  static SliceOracleT with_total_energy(Eigen::Index m, Eigen::Index p,
                                        SliceFn slice, Real total_energy) {
    if (total_energy < 0)
      throw std::invalid_argument("total energy must be non-negative");
    return SliceOracleT(m, p, std::move(slice), total_energy, nullptr);
  }

  static SliceOracleT with_tail_bound(Eigen::Index m, Eigen::Index p,
                                      SliceFn slice, TailFn tail_energy) {
    if (!tail_energy)
      throw std::invalid_argument("tail energy bound must be callable");
    return SliceOracleT(m, p, std::move(slice), std::nullopt,
                        std::move(tail_energy));
  }

  // Finite-support oracle backed by a stored tensor.
  static SliceOracleT from_tensor(const QtTensorT<Real>& x) {
    const auto h = qt_h_norm(x);
    if (!h.has_value())
      throw std::invalid_argument(
          "streaming extraction requires a zero-tail tensor");
    return with_total_energy(
        x.m(), x.p(), [x](std::int64_t k) { return x.slice(k); }, *h * *h);
  }

  Eigen::Index m() const { return m_; }
  Eigen::Index p() const { return p_; }

  Matrix slice(std::int64_t k) const {
    Matrix s;
    try {
      s = slice_(k);
    } catch (const std::exception& e) {
      throw std::runtime_error("oracle failed at frontal index " +
                               std::to_string(k) + ": " + e.what());
    }
    if (s.rows() != m_ || s.cols() != p_ || !s.allFinite())
      throw std::runtime_error("oracle returned an invalid slice at index " +
                               std::to_string(k));
    return s;
  }

  const std::optional<Real>& total_energy() const { return total_energy_; }
  bool has_tail_bound() const { return static_cast<bool>(tail_energy_); }

  Real tail_bound(std::int64_t band) const {
    if (!tail_energy_)
      throw std::logic_error("oracle has no tail energy bound");
    return tail_energy_(band);
  }

 private:
  SliceOracleT(Eigen::Index m, Eigen::Index p, SliceFn slice,
               std::optional<Real> total_energy, TailFn tail_energy)
      : m_(m), p_(p), slice_(std::move(slice)),
        total_energy_(total_energy), tail_energy_(std::move(tail_energy)) {
    if (m_ < 1 || p_ < 1)
      throw std::invalid_argument("oracle dimensions must be positive");
    if (!slice_)
      throw std::invalid_argument("oracle slice callback must be callable");
  }

  Eigen::Index m_;
  Eigen::Index p_;
  SliceFn slice_;
  std::optional<Real> total_energy_;
  TailFn tail_energy_;
};

using SliceOracle = SliceOracleT<double>;

// Band growth policy: starting radius, multiplicative growth, hard cap.
struct BandSchedule {
  std::int64_t initial = 0;
  std::int64_t factor = 2;
  std::int64_t max_band = std::int64_t(1) << 20;
};

template <typename Real>
struct CertifyResultT {
  bool certified = false;
  ComponentT<Real> leader;
  Real sigma_sq = 0;        // leading in-band sigma^2 after deflation
  Real residual_bound = 0;  // bound on the deflated out-of-band energy
  Real in_band_energy = 0;  // deflated energy inside the band
  std::int64_t slices_evaluated = 0;
};

using CertifyResult = CertifyResultT<double>;

template <typename Real>
struct ExtractionReportT {
  ComponentListT<Real> components;
  std::vector<std::int64_t> bands_used;
  // Per stage: (certified sigma^2, out-of-band energy bound it beat).
  std::vector<std::pair<Real, Real>> certificates;
  std::int64_t slices_evaluated = 0;
  Real residual_energy = 0;
};

using ExtractionReport = ExtractionReportT<double>;

namespace detail {

template <typename Real>
struct StreamSliceState {
  typename SliceOracleT<Real>::Matrix deflated;
  Real energy = 0;
  Real top_sigma = 0;
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> u0, v0;
  std::int64_t removed = 0;
};

template <typename Real>
void analyze_slice(StreamSliceState<Real>& st) {
  st.energy = st.deflated.squaredNorm();
  const auto f = slice_svd<Real>(st.deflated);
  st.top_sigma = f.s(0, 0).real();
  st.u0 = f.u.col(0);
  st.v0 = f.v.col(0);
}

template <typename Real>
struct StreamCache {
  std::map<std::int64_t, StreamSliceState<Real>> slices;
  Real in_band_energy = 0;
  Real extracted_energy = 0;
  std::int64_t evals = 0;

  void ensure(const SliceOracleT<Real>& oracle, std::int64_t band) {
    for (std::int64_t k = -band; k <= band; ++k) {
      if (slices.count(k)) continue;
      StreamSliceState<Real> st;
      st.deflated = oracle.slice(k);
      ++evals;
      analyze_slice(st);
      in_band_energy += st.energy;
      slices.emplace(k, std::move(st));
    }
  }

  ComponentT<Real> leader_of(std::int64_t k) const {
    const auto& st = slices.at(k);
    ComponentT<Real> c;
    c.sigma = st.top_sigma;
    c.l = st.removed;
    c.t = k;
    c.u = st.u0;
    c.v = st.v0;
    return c;
  }

  // Smallest frontal index attaining the strictly largest top sigma.
  std::optional<std::int64_t> argmax_slice() const {
    std::optional<std::int64_t> best;
    Real best_sigma = 0;
    for (const auto& [k, st] : slices)
      if (!best || st.top_sigma > best_sigma) {
        best = k;
        best_sigma = st.top_sigma;
      }
    return best;
  }

  void deflate(std::int64_t k, const ComponentT<Real>& c) {
    auto& st = slices.at(k);
    in_band_energy -= st.energy;
    st.deflated -= std::complex<Real>(c.sigma) * (c.u * c.v.adjoint());
    ++st.removed;
    analyze_slice(st);
    in_band_energy += st.energy;
    extracted_energy += c.sigma * c.sigma;
  }

  // Out-of-band energy bound for the deflated tensor at this band.
  Real residual_bound(const SliceOracleT<Real>& oracle,
                      std::int64_t band) const {
    if (oracle.total_energy().has_value())
      return *oracle.total_energy() - extracted_energy - in_band_energy;
    if (oracle.has_tail_bound()) return oracle.tail_bound(band);
    throw std::logic_error(
        "oracle provides neither total energy nor a tail energy bound");
  }

  CertifyResultT<Real> certify(const SliceOracleT<Real>& oracle,
                               std::int64_t band) {
    const std::int64_t before = evals;
    ensure(oracle, band);
    CertifyResultT<Real> r;
    r.slices_evaluated = evals - before;
    r.in_band_energy = in_band_energy;
    r.residual_bound = residual_bound(oracle, band);
    const auto k = argmax_slice();
    if (k.has_value()) {
      r.leader = leader_of(*k);
      r.sigma_sq = r.leader.sigma * r.leader.sigma;
    }
    r.certified = r.sigma_sq > r.residual_bound + Real(kCertifyTieTol);
    return r;
  }
};

}  // namespace detail

// One certification attempt at a fixed band, with prior extractions already
// removed from their home slices. Evaluates the 2B + 1 slices |k| <= B.
template <typename Real>
CertifyResultT<Real> certify_band(const SliceOracleT<Real>& oracle,
                                  const ComponentListT<Real>& deflated,
                                  std::int64_t band) {
  if (band < 0) throw std::invalid_argument("band must be non-negative");
  detail::StreamCache<Real> cache;
  cache.ensure(oracle, band);
  for (const auto& c : deflated.items) {
    if ((c.t < 0 ? -c.t : c.t) <= band) {
      cache.deflate(c.t, c);
    } else {
      cache.extracted_energy += c.sigma * c.sigma;
    }
  }
  auto r = cache.certify(oracle, band);
  r.slices_evaluated = cache.evals;
  return r;
}

// The staged extraction: grow the band until the current in-band leader
// provably dominates everything outside, emit it, deflate its home slice,
// repeat. Bands never shrink across stages, and every evaluated slice is
// cached for the rest of the run.
template <typename Real>
ExtractionReportT<Real> extract_top_q(const SliceOracleT<Real>& oracle,
                                      std::int64_t q,
                                      const BandSchedule& schedule = {}) {
  if (q < 0) throw std::invalid_argument("component count must be >= 0");
  if (schedule.initial < 0 || schedule.factor < 2 ||
      schedule.max_band < schedule.initial)
    throw std::invalid_argument("invalid band schedule");

  ExtractionReportT<Real> report;
  report.components.provenance = Provenance::streaming;
  detail::StreamCache<Real> cache;
  std::int64_t band = schedule.initial;

  for (std::int64_t stage = 0; stage < q; ++stage) {
    for (;;) {
      const auto r = cache.certify(oracle, band);
      if (r.certified) {
        report.components.items.push_back(r.leader);
        report.bands_used.push_back(band);
        report.certificates.emplace_back(r.sigma_sq, r.residual_bound);
        cache.deflate(r.leader.t, r.leader);
        break;
      }
      if (band >= schedule.max_band)
        throw std::runtime_error(
            "band limit reached without certification at stage " +
            std::to_string(stage + 1) + ": best sigma^2 " +
            std::to_string(r.sigma_sq) + " vs residual bound " +
            std::to_string(r.residual_bound));
      band = std::min(schedule.max_band,
                      std::max<std::int64_t>(1, band * schedule.factor));
    }
  }

  report.slices_evaluated = cache.evals;
  if (oracle.total_energy().has_value())
    report.residual_energy = *oracle.total_energy() - cache.extracted_energy;
  else
    report.residual_energy =
        cache.in_band_energy +
        (oracle.has_tail_bound() ? oracle.tail_bound(band) : Real(0));
  return report;
}

}  // namespace qtt
