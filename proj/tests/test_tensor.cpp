#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <qtt/tensor.hpp>

#include "qt_test_util.hpp"

using namespace qtt;
using qtt_test::cd;
using qtt_test::close;
using qtt_test::qt_max_diff;
using qtt_test::random_cmat;
using qtt_test::random_qt;
using qtt_test::random_qt_unitary;
using qtt_test::random_unitary;
using qtt_test::seq_max_diff;

TEST_CASE("canonical form trims slices equal to the tail slice") {
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Constant(2, 2, cd(1));
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Constant(2, 2, cd(7));
  const QtTensor x = QtTensor::from_slices(3, {t, s, t}, t);
  CHECK(x.lo() == 4);
  CHECK(x.band_size() == 1);
  CHECK(x.slice(3) == t);
  CHECK(x.slice(4) == s);
  CHECK(x.slice(-100) == t);

  const QtTensor z = QtTensor::zero(3, 2);
  CHECK(z.band_empty());
  CHECK(z.lo() == 0);
  CHECK(QtTensor::from_slices(9, {t}, t) == QtTensor::from_slices(0, {}, t));
}

TEST_CASE("entry views agree with slices at every frontal index") {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const QtTensor x = random_qt(rng, 3, 4, 5, trial % 2 == 0);
    for (Eigen::Index i = 0; i < x.m(); ++i)
      for (Eigen::Index j = 0; j < x.p(); ++j) {
        const EcSeq e = x.entry(i, j);
        for (std::int64_t k = x.lo() - 2; k <= x.hi() + 2; ++k)
          CHECK(e.at(k) == x.slice(k)(i, j));
      }
  }
}

TEST_CASE("identity tensor is a two-sided unit") {
  SplitMix64 rng(22);
  const QtTensor i2 = qt_identity(2);
  CHECK(qt_conj_transpose(i2) == i2);
  CHECK(qt_op_norm(i2) == 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const QtTensor x = random_qt(rng, 2, 2, 5, trial % 2 == 0);
    CHECK(qt_max_diff(qt_prod(i2, x), x) == 0.0);
    CHECK(qt_max_diff(qt_prod(x, i2), x) == 0.0);
  }
}

TEST_CASE("facewise product matches a dense window oracle exactly") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const QtTensor x = random_qt(rng, 3, 4, 4, trial % 2 == 0);
    const QtTensor y = random_qt(rng, 4, 2, 4, trial % 3 == 0);
    const QtTensor z = qt_prod(x, y);
    CHECK(z.m() == 3);
    CHECK(z.p() == 2);
    for (std::int64_t k = std::min(x.lo(), y.lo()) - 2;
         k <= std::max(x.hi(), y.hi()) + 2; ++k) {
      const Eigen::MatrixXcd oracle = x.slice(k) * y.slice(k);
      CHECK((z.slice(k) - oracle).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("band slices at distinct frontal indices never interact") {
  SplitMix64 rng(24);
  const Eigen::MatrixXcd a = random_cmat(rng, 2, 2);
  const Eigen::MatrixXcd b = random_cmat(rng, 2, 2);
  const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(2, 2);
  const QtTensor x = QtTensor::from_slices(2, {a}, zero);
  const QtTensor y = QtTensor::from_slices(5, {b}, zero);
  CHECK(qt_prod(x, y) == QtTensor::zero(2, 2));

  const Eigen::MatrixXcd tx = random_cmat(rng, 2, 2);
  const Eigen::MatrixXcd ty = random_cmat(rng, 2, 2);
  const QtTensor xt = QtTensor::from_slices(2, {a}, tx);
  const QtTensor yt = QtTensor::from_slices(5, {b}, ty);
  const QtTensor z = qt_prod(xt, yt);
  CHECK(z.slice(2) == Eigen::MatrixXcd(a * ty));
  CHECK(z.slice(5) == Eigen::MatrixXcd(tx * b));
  CHECK(z.slice(3) == Eigen::MatrixXcd(tx * ty));
  CHECK(z.tail_slice() == Eigen::MatrixXcd(tx * ty));
}

TEST_CASE("conjugate transpose is an involutive antihomomorphism") {
  SplitMix64 rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    const QtTensor x = random_qt(rng, 3, 4, 4, trial % 2 == 0);
    const QtTensor y = random_qt(rng, 4, 3, 4, trial % 3 == 0);
    CHECK(qt_conj_transpose(qt_conj_transpose(x)) == x);
    CHECK(qt_max_diff(qt_conj_transpose(qt_prod(x, y)),
                      qt_prod(qt_conj_transpose(y), qt_conj_transpose(x))) <=
          1e-13);
    const QtTensor xs = qt_conj_transpose(x);
    for (Eigen::Index i = 0; i < x.m(); ++i)
      for (Eigen::Index j = 0; j < x.p(); ++j)
        CHECK(xs.entry(j, i) == conj(x.entry(i, j)));
  }
}

TEST_CASE("h-norm is finite exactly on the zero-tail subspace") {
  CHECK(*qt_h_norm(QtTensor::zero(2, 3)) == 0.0);
  CHECK(!qt_h_norm(qt_identity(2)).has_value());

  SplitMix64 rng(26);
  for (int trial = 0; trial < 20; ++trial) {
    const QtTensor x = random_qt(rng, 3, 3, 5, true);
    double sum = 0;
    for (std::int64_t k = x.lo(); k <= x.hi(); ++k)
      sum += x.slice(k).squaredNorm();
    const auto n = qt_h_norm(x);
    REQUIRE(n.has_value());
    CHECK(close(*n, std::sqrt(sum), 1e-14));
    CHECK(!qt_h_norm(random_qt(rng, 3, 3, 5, false)).has_value());
  }
}

TEST_CASE("operator norm is the largest slice spectral norm") {
  CHECK(qt_op_norm(qt_identity(3)) == 1.0);
  CHECK(qt_op_norm(qt_identity(1)) == 1.0);
  CHECK(qt_op_norm(QtTensor::zero(2, 2)) == 0.0);

  SplitMix64 rng(27);
  for (int trial = 0; trial < 20; ++trial) {
    const QtTensor x = random_qt(rng, 3, 4, 5, trial % 2 == 0);
    double m = 0;
    for (std::int64_t k = x.lo() - 1; k <= x.hi() + 1; ++k)
      m = std::max(m,
                   Eigen::JacobiSVD<Eigen::MatrixXcd>(x.slice(k))
                       .singularValues()(0));
    CHECK(close(qt_op_norm(x), m, 1e-12));
  }
}

TEST_CASE("power iteration handles slices past the dense-SVD crossover") {
  SplitMix64 rng(28);
  const Eigen::Index n = 70;
  Eigen::VectorXcd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = cd(1.0 / double(i + 1));
  d(0) = cd(10.0);
  const Eigen::MatrixXcd a = random_unitary(rng, n) * d.asDiagonal() *
                             random_unitary(rng, n).adjoint();
  const double ref = Eigen::JacobiSVD<Eigen::MatrixXcd>(a).singularValues()(0);
  CHECK(close(spectral_norm(a), ref, 1e-9));

  const QtTensor x =
      QtTensor::from_slices(0, {a}, Eigen::MatrixXcd::Zero(n, n));
  CHECK(close(qt_op_norm(x), ref, 1e-9));
}

TEST_CASE("trace sums the diagonal sequences") {
  CHECK(qt_trace(qt_identity(3)) == EcSeq::constant(cd(3)));

  Eigen::MatrixXcd d0 = Eigen::MatrixXcd::Zero(2, 2);
  Eigen::MatrixXcd d1 = Eigen::MatrixXcd::Zero(2, 2);
  d0(0, 0) = 1;
  d1(1, 1) = 1;
  const QtTensor x =
      QtTensor::from_slices(0, {d0, d1}, Eigen::MatrixXcd::Zero(2, 2));
  CHECK(qt_trace(x) == EcSeq::from_band(0, {cd(1), cd(1)}));

  SplitMix64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const QtTensor a = random_qt(rng, 3, 3, 4, false);
    const QtTensor b = random_qt(rng, 3, 3, 4, false);
    const cd alpha = rng.cnormal();
    const cd beta = rng.cnormal();
    CHECK(seq_max_diff(qt_trace(alpha * a + beta * b),
                       alpha * qt_trace(a) + beta * qt_trace(b)) <= 1e-12);
  }
  CHECK_THROWS_AS(qt_trace(QtTensor::zero(2, 3)), std::invalid_argument);
}

TEST_CASE("gram inner product behaves like a C*-valued inner product") {
  CHECK(qt_gram_inner(qt_identity(3), qt_identity(3)) ==
        EcSeq::constant(cd(3)));

  SplitMix64 rng(30);
  for (int trial = 0; trial < 30; ++trial) {
    const QtTensor x = random_qt(rng, 3, 2, 4, trial % 2 == 0);
    const QtTensor y = random_qt(rng, 3, 2, 4, trial % 3 == 0);
    CHECK(spectrum(qt_gram_inner(x, x)).is_nonneg);
    CHECK(seq_max_diff(qt_gram_inner(x, y), conj(qt_gram_inner(y, x))) <=
          1e-12);
  }
  CHECK_THROWS_AS(qt_gram_inner(QtTensor::zero(2, 3), QtTensor::zero(3, 2)),
                  std::invalid_argument);
}

TEST_CASE("module Cauchy-Schwarz inequality on random columns") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const QtTensor x = random_qt(rng, 4, 1, 4, trial % 2 == 0);
    const QtTensor y = random_qt(rng, 4, 1, 4, trial % 3 == 0);
    const EcSeq g = qt_gram_inner(x, y);
    const EcSeq lhs = abs(g) * abs(g);
    const double bound = qt_op_norm(x);
    const EcSeq rhs = (bound * bound) * qt_gram_inner(y, y);
    CHECK(geq(rhs, lhs));
  }
}

TEST_CASE("h inner product induces the h-norm and sees the adjoint") {
  SplitMix64 rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const QtTensor x = random_qt(rng, 3, 2, 4, true);
    const QtTensor y = random_qt(rng, 3, 2, 4, true);
    const auto n = qt_h_norm(x);
    CHECK(close(qt_h_inner(x, x).real(), *n * *n, 1e-12, 1e-300));
    CHECK(std::abs(qt_h_inner(x, x).imag()) <= 1e-12);
    const cd alpha = rng.cnormal();
    CHECK(close(qt_h_inner(alpha * x, y), std::conj(alpha) * qt_h_inner(x, y),
                1e-12, 1e-13));

    const QtTensor t = random_qt(rng, 3, 3, 4, trial % 2 == 0);
    CHECK(close(qt_h_inner(qt_prod(t, x), y),
                qt_h_inner(x, qt_prod(qt_conj_transpose(t), y)), 1e-11,
                1e-13));
  }

  const QtTensor a =
      QtTensor::from_slices(0, {random_cmat(rng, 2, 2)},
                            Eigen::MatrixXcd::Zero(2, 2));
  const QtTensor b =
      QtTensor::from_slices(7, {random_cmat(rng, 2, 2)},
                            Eigen::MatrixXcd::Zero(2, 2));
  CHECK(qt_h_inner(a, b) == cd(0));
  CHECK_THROWS_AS(qt_h_inner(qt_identity(2), qt_identity(2)),
                  std::domain_error);
  CHECK_THROWS_AS(qt_h_inner(QtTensor::zero(2, 3), QtTensor::zero(3, 2)),
                  std::invalid_argument);
}

TEST_CASE("f-diagonal and star-unitary predicates") {
  CHECK(qt_is_f_diagonal(qt_identity(3)));
  CHECK(qt_is_star_unitary(qt_identity(3)));

  const double th = 0.7;
  Eigen::MatrixXcd rot(2, 2);
  rot << cd(std::cos(th)), cd(-std::sin(th)), cd(std::sin(th)),
      cd(std::cos(th));
  const QtTensor u =
      QtTensor::from_slices(0, {rot}, Eigen::MatrixXcd::Identity(2, 2));
  CHECK(qt_is_star_unitary(u));
  CHECK(!qt_is_f_diagonal(u));

  SplitMix64 rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const QtTensor v = random_qt_unitary(rng, 3, 4);
    CHECK(qt_is_star_unitary(v));
    CHECK(!qt_is_star_unitary(cd(2) * v));
  }
  CHECK(!qt_is_star_unitary(QtTensor::zero(2, 2)));
  CHECK_THROWS_AS(qt_is_star_unitary(QtTensor::zero(2, 3)),
                  std::invalid_argument);

  Eigen::MatrixXcd offdiag = Eigen::MatrixXcd::Zero(2, 2);
  offdiag(0, 1) = 1e-8;
  CHECK(!qt_is_f_diagonal(
      QtTensor::from_slices(0, {offdiag}, Eigen::MatrixXcd::Zero(2, 2))));
  CHECK(qt_is_f_diagonal(
      QtTensor::from_slices(0, {offdiag}, Eigen::MatrixXcd::Zero(2, 2)),
      1e-6));
}

TEST_CASE("multiplication by star-unitary tensors is an isometry") {
  SplitMix64 rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const QtTensor u = random_qt_unitary(rng, 3, 4);
    const QtTensor x = random_qt(rng, 3, 2, 4, trial % 2 == 0);
    CHECK(close(qt_op_norm(qt_prod(u, x)), qt_op_norm(x), 1e-10));
    const QtTensor h = random_qt(rng, 3, 2, 4, true);
    const auto before = qt_h_norm(h);
    const auto after = qt_h_norm(qt_prod(u, h));
    REQUIRE(after.has_value());
    CHECK(close(*after, *before, 1e-10, 1e-300));
  }
}

TEST_CASE("operator norm satisfies the C*-identity") {
  SplitMix64 rng(35);
  for (int trial = 0; trial < 20; ++trial) {
    const QtTensor x = random_qt(rng, 3, 3, 5, trial % 2 == 0);
    const double n = qt_op_norm(x);
    CHECK(close(qt_op_norm(qt_prod(qt_conj_transpose(x), x)), n * n, 1e-9,
                1e-300));
  }
}

TEST_CASE("finite product with identity transform is facewise") {
  SplitMix64 rng(36);
  const TransformSpec spec = TransformSpec::identity(4);
  std::vector<Eigen::MatrixXcd> xs, ys;
  for (int k = 0; k < 4; ++k) {
    xs.push_back(random_cmat(rng, 2, 3));
    ys.push_back(random_cmat(rng, 3, 2));
  }
  const FiniteTubalTensor x(xs, spec);
  const FiniteTubalTensor y(ys, spec);
  const FiniteTubalTensor z = finite_tprod(x, y);
  for (int k = 0; k < 4; ++k)
    CHECK(qtt_test::max_abs_diff(z.slices()[k],
                                 Eigen::MatrixXcd(xs[k] * ys[k])) <= 1e-13);
}

TEST_CASE("finite product agrees with the tube-level oracle") {
  SplitMix64 rng(37);
  for (const auto& spec :
       {TransformSpec::dft_unitary(4), TransformSpec::dct2_orthonormal(4),
        TransformSpec::custom(cd(2) * random_unitary(rng, 4))}) {
    std::vector<Eigen::MatrixXcd> xs, ys;
    for (int k = 0; k < 4; ++k) {
      xs.push_back(random_cmat(rng, 2, 3));
      ys.push_back(random_cmat(rng, 3, 2));
    }
    const FiniteTubalTensor x(xs, spec);
    const FiniteTubalTensor y(ys, spec);
    const FiniteTubalTensor z = finite_tprod(x, y);
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index j = 0; j < 2; ++j) {
        Eigen::VectorXcd want = Eigen::VectorXcd::Zero(4);
        for (Eigen::Index l = 0; l < 3; ++l)
          want += tube_mprod(Eigen::VectorXcd(x.tube(i, l)),
                             Eigen::VectorXcd(y.tube(l, j)), spec);
        CHECK(qtt_test::max_abs_diff(Eigen::VectorXcd(z.tube(i, j)), want) <=
              1e-10);
      }
  }
}

TEST_CASE("finite identity tensor is a unit for every transform") {
  SplitMix64 rng(38);
  for (const auto& spec :
       {TransformSpec::identity(5), TransformSpec::dft_unitary(5),
        TransformSpec::dct2_orthonormal(5),
        TransformSpec::custom(random_unitary(rng, 5) * cd(0, 1))}) {
    std::vector<Eigen::MatrixXcd> xs;
    for (int k = 0; k < 5; ++k) xs.push_back(random_cmat(rng, 3, 3));
    const FiniteTubalTensor x(xs, spec);
    const FiniteTubalTensor eye = finite_identity(3, spec);
    CHECK(qtt_test::max_abs_diff(finite_tprod(x, eye).slices()[2],
                                 xs[2]) <= 1e-12);
    CHECK(qtt_test::max_abs_diff(finite_tprod(eye, x).slices()[4],
                                 xs[4]) <= 1e-12);
  }
}

TEST_CASE("one-by-one finite tensors reduce to tube products") {
  SplitMix64 rng(39);
  const TransformSpec spec = TransformSpec::dct2_orthonormal(6);
  std::vector<Eigen::MatrixXcd> xs, ys;
  for (int k = 0; k < 6; ++k) {
    xs.push_back(random_cmat(rng, 1, 1));
    ys.push_back(random_cmat(rng, 1, 1));
  }
  const FiniteTubalTensor x(xs, spec);
  const FiniteTubalTensor y(ys, spec);
  const Eigen::VectorXcd got = finite_tprod(x, y).tube(0, 0);
  const Eigen::VectorXcd want = tube_mprod(
      Eigen::VectorXcd(x.tube(0, 0)), Eigen::VectorXcd(y.tube(0, 0)), spec);
  CHECK(qtt_test::max_abs_diff(got, want) <= 1e-12);
}

TEST_CASE("finite product is associative and distributive") {
  SplitMix64 rng(40);
  const TransformSpec spec = TransformSpec::dft_unitary(4);
  auto rand_t = [&](Eigen::Index m, Eigen::Index p) {
    std::vector<Eigen::MatrixXcd> s;
    for (int k = 0; k < 4; ++k) s.push_back(random_cmat(rng, m, p));
    return FiniteTubalTensor(s, spec);
  };
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = rand_t(2, 3);
    const auto y = rand_t(3, 2);
    const auto z = rand_t(2, 3);
    const auto lhs = finite_tprod(finite_tprod(x, y), z);
    const auto rhs = finite_tprod(x, finite_tprod(y, z));
    for (int k = 0; k < 4; ++k)
      CHECK(qtt_test::max_abs_diff(lhs.slices()[k], rhs.slices()[k]) <= 1e-10);

    const auto w = rand_t(3, 2);
    const auto d1 = finite_tprod(x, FiniteTubalTensor(
        [&] {
          std::vector<Eigen::MatrixXcd> s;
          for (int k = 0; k < 4; ++k)
            s.push_back(y.slices()[k] + w.slices()[k]);
          return s;
        }(),
        spec));
    for (int k = 0; k < 4; ++k)
      CHECK(qtt_test::max_abs_diff(
                d1.slices()[k],
                Eigen::MatrixXcd(finite_tprod(x, y).slices()[k] +
                                 finite_tprod(x, w).slices()[k])) <= 1e-10);
  }
  CHECK_THROWS_AS(
      finite_tprod(rand_t(2, 3),
                   FiniteTubalTensor(
                       std::vector<Eigen::MatrixXcd>(
                           5, Eigen::MatrixXcd::Zero(3, 2)),
                       TransformSpec::dft_unitary(5))),
      std::invalid_argument);
}

TEST_CASE("embedding a finite tensor produces a banded zero-tail tensor") {
  SplitMix64 rng(41);
  const TransformSpec spec = TransformSpec::dft_unitary(4);
  std::vector<Eigen::MatrixXcd> xs;
  for (int k = 0; k < 4; ++k) xs.push_back(random_cmat(rng, 2, 3));
  const FiniteTubalTensor x(xs, spec);

  const QtTensor q = finite_to_qt(x);
  const auto xh = mode3_apply(xs, spec, Direction::forward);
  for (int k = 0; k < 4; ++k) CHECK(q.slice(k) == xh[static_cast<std::size_t>(k)]);
  CHECK(q.tail_slice().isZero(0.0));

  const auto n = qt_h_norm(q);
  REQUIRE(n.has_value());
  CHECK(close(*n, x.fro_norm(), 1e-12));

  const QtTensor shifted = finite_to_qt(x, -7);
  for (int k = 0; k < 4; ++k)
    CHECK(shifted.slice(-7 + k) == xh[static_cast<std::size_t>(k)]);

  std::vector<Eigen::MatrixXcd> back(4);
  for (int k = 0; k < 4; ++k) back[static_cast<std::size_t>(k)] = q.slice(k);
  const auto rec = mode3_apply(back, spec, Direction::inverse);
  for (int k = 0; k < 4; ++k)
    CHECK(qtt_test::max_abs_diff(rec[static_cast<std::size_t>(k)], xs[static_cast<std::size_t>(k)]) <= 1e-12);

  CHECK_THROWS_AS(
      finite_to_qt(FiniteTubalTensor(
          xs, TransformSpec::custom(cd(2) * random_unitary(rng, 4)))),
      std::invalid_argument);
}

TEST_CASE("shape mismatches are rejected") {
  CHECK_THROWS_AS(qt_prod(QtTensor::zero(2, 3), QtTensor::zero(2, 3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(QtTensor::zero(2, 2) + QtTensor::zero(3, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(QtTensor::from_slices(
                      0, {Eigen::MatrixXcd::Zero(2, 2)},
                      Eigen::MatrixXcd::Zero(3, 3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(FiniteTubalTensor(
                      std::vector<Eigen::MatrixXcd>(
                          3, Eigen::MatrixXcd::Zero(2, 2)),
                      TransformSpec::dft_unitary(4)),
                  std::invalid_argument);
}
