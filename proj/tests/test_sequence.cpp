#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <qtt/random.hpp>
#include <qtt/sequence.hpp>

#include "test_util.hpp"

using namespace qtt;
using qtt_test::cd;
using qtt_test::close;

namespace {

double max_seq_diff(const EcSeq& a, const EcSeq& b) {
  std::int64_t lo = std::min(a.lo(), b.lo()) - 1;
  std::int64_t hi = std::max(a.hi(), b.hi()) + 1;
  double m = std::abs(a.tail() - b.tail());
  for (std::int64_t k = lo; k <= hi; ++k)
    m = std::max(m, std::abs(a.at(k) - b.at(k)));
  return m;
}

EcSeq random_seq(SplitMix64& rng, std::int64_t max_band, bool zero_tail) {
  const auto n = static_cast<std::int64_t>(rng.uniform_int(0, max_band));
  const std::int64_t lo = rng.uniform_int(-8, 8);
  std::vector<cd> values(static_cast<std::size_t>(n));
  for (auto& v : values) v = rng.cnormal();
  const cd tail = zero_tail ? cd(0) : rng.cnormal();
  return EcSeq::from_band(lo, std::move(values), tail);
}

}  // namespace

TEST_CASE("canonical form trims band entries equal to the tail") {
  const EcSeq a = EcSeq::from_band(2, {cd(5), cd(5), cd(7), cd(5)}, cd(5));
  CHECK(a.lo() == 4);
  CHECK(a.band_size() == 1);
  CHECK(a.values()[0] == cd(7));
  CHECK(a.at(2) == cd(5));
  CHECK(a.at(4) == cd(7));
  CHECK(a.at(100) == cd(5));

  CHECK(EcSeq::from_band(0, {cd(1), cd(1)}, cd(1)) == EcSeq::unit());
  const EcSeq empty = EcSeq::from_band(37, {}, cd(0));
  CHECK(empty == EcSeq::zero());
  CHECK(empty.lo() == 0);
}

TEST_CASE("unit and zero laws") {
  const EcSeq q = EcSeq::from_band(-1, {cd(2, 1), cd(0, -3)}, cd(0.5));
  CHECK(EcSeq::unit() * q == q);
  CHECK(q * EcSeq::unit() == q);
  CHECK(EcSeq::zero() + q == q);
  CHECK(EcSeq::zero() * q == EcSeq::zero());
}

TEST_CASE("basis sequences are idempotent and mutually orthogonal") {
  const EcSeq d3 = EcSeq::basis(3);
  CHECK(d3 * d3 == d3);
  CHECK(EcSeq::basis(2) * d3 == EcSeq::zero());
  CHECK(l2_norm(d3).has_value());
  CHECK(*l2_norm(d3) == 1.0);
}

TEST_CASE("products depend on position, not just values") {
  const double r = 1.0 / std::sqrt(2.0);
  const EcSeq a = EcSeq::from_band(0, {cd(r), cd(r)});
  const EcSeq b = EcSeq::from_band(0, {cd(r), cd(-r)});
  const EcSeq ab = a * b;
  CHECK(ab.lo() == 0);
  CHECK(ab.band_size() == 2);
  CHECK(close(ab.at(0), cd(0.5), 1e-15));
  CHECK(close(ab.at(1), cd(-0.5), 1e-15));
  CHECK(ab.tail() == cd(0));
}

TEST_CASE("addition merges disjoint bands and fills the gap with tail sums") {
  const EcSeq a = EcSeq::from_band(0, {cd(1), cd(2)}, cd(0.25));
  const EcSeq b = EcSeq::from_band(5, {cd(10)}, cd(0.75));
  const EcSeq s = a + b;
  CHECK(s.tail() == cd(1));
  CHECK(s.at(0) == cd(1.75));
  CHECK(s.at(1) == cd(2.75));
  CHECK(s.at(3) == cd(1));
  CHECK(s.at(5) == cd(10.25));
  CHECK(s.at(-1) == cd(1));
}

TEST_CASE("square-summable sequences form a two-sided ideal") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const EcSeq h = random_seq(rng, 6, true);
    const EcSeq q = random_seq(rng, 6, false);
    CHECK((h * q).tail() == cd(0));
    CHECK((q * h).tail() == cd(0));
    CHECK(l2_norm(h * q).has_value());
  }
}

TEST_CASE("conjugation is an involution and an algebra antihomomorphism") {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const EcSeq a = random_seq(rng, 6, false);
    const EcSeq b = random_seq(rng, 6, false);
    CHECK(conj(conj(a)) == a);
    CHECK(conj(a * b) == conj(a) * conj(b));
    CHECK(conj(a + b) == conj(a) + conj(b));
  }
}

TEST_CASE("sup norm values and the multiplicative star identity") {
  CHECK(sup_norm(EcSeq::unit()) == 1.0);
  CHECK(sup_norm(EcSeq::from_band(0, {cd(3), cd(0, -4)}, cd(1))) == 4.0);

  SplitMix64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const EcSeq a = random_seq(rng, 8, trial % 2 == 0);
    const double n = sup_norm(a);
    CHECK(close(sup_norm(conj(a) * a), n * n, 1e-10));
    const EcSeq b = random_seq(rng, 8, false);
    CHECK(sup_norm(a * b) <= sup_norm(a) * sup_norm(b) + 1e-12);
    CHECK(sup_norm(a + b) <= sup_norm(a) + sup_norm(b) + 1e-12);
  }
}

TEST_CASE("l2 norm exists exactly on the zero-tail ideal") {
  CHECK(!l2_norm(EcSeq::unit()).has_value());
  CHECK(!l2_norm(EcSeq::constant(cd(0, 1e-300))).has_value());
  const auto n = l2_norm(EcSeq::from_band(2, {cd(3), cd(4)}));
  REQUIRE(n.has_value());
  CHECK(*n == 5.0);
}

TEST_CASE("spectrum collects distinct values plus the tail") {
  const EcSeq a = EcSeq::from_band(
      -2, {cd(1), cd(0.5), cd(0.2), cd(0.1), cd(1.0 / 17.0)});
  const auto sp = spectrum(a);
  CHECK(sp.points.size() == 6);
  CHECK(sp.is_selfadjoint);
  CHECK(sp.is_nonneg);
  CHECK(!sp.is_strictly_pos);

  const auto sz = spectrum(EcSeq::zero());
  CHECK(sz.points.size() == 1);
  CHECK(sz.is_nonneg);
  CHECK(!sz.is_strictly_pos);

  const auto sm = spectrum(EcSeq::from_band(0, {cd(2), cd(-1)}, cd(3)));
  CHECK(sm.points.size() == 3);
  CHECK(sm.is_selfadjoint);
  CHECK(!sm.is_nonneg);

  const auto sdup = spectrum(EcSeq::from_band(0, {cd(2), cd(2), cd(3)}, cd(3)));
  CHECK(sdup.points.size() == 2);

  CHECK(!spectrum(EcSeq::from_band(0, {cd(0, 1)})).is_selfadjoint);
  CHECK(spectrum(EcSeq::constant(cd(2))).is_strictly_pos);
}

TEST_CASE("order relation from spectra of differences") {
  const EcSeq a = EcSeq::from_band(0, {cd(1), cd(2)});
  const EcSeq b = EcSeq::from_band(0, {cd(2), cd(1)});
  CHECK(geq(a, a));
  CHECK(geq(EcSeq::unit(), EcSeq::basis(5)));
  CHECK(!geq(a, b));
  CHECK(!geq(b, a));

  SplitMix64 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    EcSeq x = random_seq(rng, 6, false);
    EcSeq y = random_seq(rng, 6, false);
    x = conj(x) * x;
    y = conj(y) * y;
    const EcSeq s = x + y;
    CHECK(geq(s, x));
    CHECK(sup_norm(s) >= sup_norm(x) - 1e-12);
  }
}

TEST_CASE("square roots: non-negative branch") {
  const EcSeq a = EcSeq::from_band(0, {cd(4), cd(9)}, cd(1));
  CHECK(sqrt_nonneg(a) == EcSeq::from_band(0, {cd(2), cd(3)}, cd(1)));
  CHECK(sqrt_nonneg(EcSeq::unit()) == EcSeq::unit());
  CHECK_THROWS_AS(sqrt_nonneg(EcSeq::from_band(0, {cd(-4)})),
                  std::domain_error);
  CHECK_THROWS_AS(sqrt_nonneg(EcSeq::from_band(0, {cd(0, 1)})),
                  std::domain_error);

  SplitMix64 rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    EcSeq x = random_seq(rng, 6, trial % 2 == 0);
    x = conj(x) * x;
    const EcSeq r = sqrt_nonneg(x);
    CHECK(spectrum(r).is_nonneg);
    CHECK(max_seq_diff(r * r, x) <= 1e-12 * std::max(1.0, sup_norm(x)));
  }
}

TEST_CASE("square roots: self-adjoint branch picks +i for negative entries") {
  const EcSeq r = sqrt_selfadjoint(EcSeq::from_band(0, {cd(-4)}));
  CHECK(r == EcSeq::from_band(0, {cd(0, 2)}));
  CHECK(r * r == EcSeq::from_band(0, {cd(-4)}));
  CHECK(sqrt_selfadjoint(EcSeq::from_band(0, {cd(9)}, cd(4))) ==
        EcSeq::from_band(0, {cd(3)}, cd(2)));
  CHECK_THROWS_AS(sqrt_selfadjoint(EcSeq::from_band(0, {cd(0, 1)})),
                  std::domain_error);
}

TEST_CASE("modulus is the non-negative square root of conj(a) * a") {
  CHECK(abs(EcSeq::from_band(0, {cd(3, 4)})) == EcSeq::from_band(0, {cd(5)}));
  SplitMix64 rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    const EcSeq a = random_seq(rng, 6, trial % 2 == 0);
    const EcSeq m = abs(a);
    CHECK(spectrum(m).is_nonneg);
    CHECK(sup_norm(m) == sup_norm(a));
    CHECK(max_seq_diff(m * m, conj(a) * a) <=
          1e-12 * std::max(1.0, sup_norm(a) * sup_norm(a)));
  }
}

TEST_CASE("inverses exist iff the spectrum avoids zero") {
  const EcSeq a = EcSeq::from_band(0, {cd(4)}, cd(2));
  CHECK(inverse(a) == EcSeq::from_band(0, {cd(0.25)}, cd(0.5)));
  CHECK(inverse(a) * a == EcSeq::unit());
  CHECK(inverse(EcSeq::unit()) == EcSeq::unit());
  CHECK_THROWS_AS(inverse(EcSeq::basis(0)), std::domain_error);
  CHECK_THROWS_AS(inverse(EcSeq::zero()), std::domain_error);
  CHECK_THROWS_AS(inverse(EcSeq::from_band(0, {cd(1e-13)}, cd(1))),
                  std::domain_error);
}

TEST_CASE("multiplier matrices are diagonal windows of the sequence") {
  const EcSeq a = EcSeq::from_band(0, {cd(3), cd(4)});
  const auto m = multiplier_matrix(a, -1, 2);
  REQUIRE(m.rows() == 4);
  CHECK(m(0, 0) == cd(0));
  CHECK(m(1, 1) == cd(3));
  CHECK(m(2, 2) == cd(4));
  CHECK(m(3, 3) == cd(0));
  CHECK(m(0, 1) == cd(0));
  CHECK(close(m.norm(), *l2_norm(a), 1e-15));

  const auto id = multiplier_matrix(EcSeq::unit(), 0, 4);
  CHECK(id.isApprox(decltype(id)::Identity(5, 5)));
  CHECK_THROWS_AS(multiplier_matrix(a, 3, 2), std::invalid_argument);
}

TEST_CASE("spectral radius equals the sup norm for self-adjoint sequences") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    EcSeq a = random_seq(rng, 8, trial % 2 == 0);
    a = cd(0.5) * (a + conj(a));
    const auto sp = spectrum(a);
    double radius = 0;
    for (const auto& z : sp.points) radius = std::max(radius, std::abs(z));
    CHECK(close(radius, sup_norm(a), 1e-14));
  }
}

TEST_CASE("zero-tail sequences reconstruct from scaled basis atoms") {
  SplitMix64 rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const EcSeq a = random_seq(rng, 8, true);
    EcSeq sum = EcSeq::zero();
    for (std::int64_t k = a.lo(); k <= a.hi(); ++k)
      sum = sum + a.at(k) * EcSeq::basis(k);
    CHECK(sum == a);
  }
}

TEST_CASE("hadamard algebra laws hold to roundoff") {
  SplitMix64 rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    const EcSeq a = random_seq(rng, 6, false);
    const EcSeq b = random_seq(rng, 6, false);
    const EcSeq c = random_seq(rng, 6, false);
    CHECK(a * b == b * a);
    CHECK(max_seq_diff((a * b) * c, a * (b * c)) <= 1e-12);
    CHECK(max_seq_diff(a * (b + c), a * b + a * c) <= 1e-12);
  }
}
