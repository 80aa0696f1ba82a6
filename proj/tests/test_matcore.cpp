/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include <doctest.h>

#include <cmath>

#include "cpapprox/error.hpp"
#include "cpapprox/matcore.hpp"
#include "cpapprox/sampling.hpp"

using namespace cpapprox;

namespace {

double max_abs(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

// Closed form for the eigenvalues of [[p, b], [conj(b), q]].
std::pair<double, double> eig2(double p, double q, Complex b) {
  const double mid = 0.5 * (p + q);
  const double rad = std::sqrt(0.25 * (p - q) * (p - q) + std::norm(b));
  return {mid - rad, mid + rad};
}

}  // namespace

TEST_CASE("2x2 eigenvalues match the closed form") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double p = uniform(rng, -3, 3), q = uniform(rng, -3, 3);
    const Complex b(uniform(rng, -2, 2), uniform(rng, -2, 2));
    CMatrix m(2, 2);
    m << p, b, std::conj(b), q;
    const auto [lo, hi] = eig2(p, q, b);
    const SpectralDecomposition sd = eig_herm(HermitianMatrix::from(m));
    CHECK(sd.eigenvalues(0) == doctest::Approx(lo).epsilon(1e-12));
    CHECK(sd.eigenvalues(1) == doctest::Approx(hi).epsilon(1e-12));
    CHECK(lambda_min(HermitianMatrix::from(m)) == doctest::Approx(lo).epsilon(1e-12));
  }
}

TEST_CASE("eigendecomposition reconstructs and is unitary") {
  Rng rng(12);
  for (int n : {1, 2, 3, 5, 8}) {
    const HermitianMatrix a = HermitianMatrix::symmetrized(random_gaussian(rng, n, n));
    const SpectralDecomposition sd = eig_herm(a);
    CHECK(max_abs(sd.reconstruct() - a.matrix()) < 1e-12);
    CHECK(max_abs(sd.eigenvectors.adjoint() * sd.eigenvectors - CMatrix::Identity(n, n)) < 1e-12);
    for (Eigen::Index i = 1; i < sd.eigenvalues.size(); ++i) CHECK(sd.eigenvalues(i - 1) <= sd.eigenvalues(i));
  }
}

TEST_CASE("psd_sqrt is the positive square root") {
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const int n = 1 + i % 4;
    const HermitianMatrix a = random_psd(rng, n, 0.0, 3.0);
    const HermitianMatrix r = psd_sqrt(a);
    CHECK(max_abs(r.matrix() * r.matrix() - a.matrix()) < 1e-11);
    CHECK(lambda_min(r) >= -1e-12);
    CHECK(max_abs(r.matrix() * a.matrix() - a.matrix() * r.matrix()) < 1e-11);
  }
}

TEST_CASE("psd_sqrt of a diagonal matrix is the entrywise root") {
  RVector d(4);
  d << 0.0, 0.25, 1.0, 9.0;
  const HermitianMatrix r = psd_sqrt(HermitianMatrix::diagonal(d));
  RVector expected(4);
  expected << 0.0, 0.5, 1.0, 3.0;
  CHECK(max_abs(r.matrix() - CMatrix(expected.cast<Complex>().asDiagonal())) < 1e-15);
}

TEST_CASE("psd_sqrt clamps roundoff and rejects negative spectra") {
  RVector tiny(2);
  tiny << -1e-12, 1.0;
  CHECK_NOTHROW(psd_sqrt(HermitianMatrix::diagonal(tiny)));
  RVector neg(2);
  neg << -1e-3, 1.0;
  try {
    psd_sqrt(HermitianMatrix::diagonal(neg));
    FAIL("expected NotPsd");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPsd);
    CHECK(e.witness() == doctest::Approx(-1e-3));
  }
}

TEST_CASE("psd_inv_sqrt whitens and enforces its floor") {
  Rng rng(14);
  for (int i = 0; i < 30; ++i) {
    const int n = 2 + i % 3;
    const HermitianMatrix a = random_psd(rng, n, 0.2, 2.0);
    const HermitianMatrix s = psd_inv_sqrt(a, 0.1);
    CHECK(max_abs(s.matrix() * a.matrix() * s.matrix() - CMatrix::Identity(n, n)) < 1e-11);
  }
  RVector d(2);
  d << 0.05, 1.0;
  try {
    psd_inv_sqrt(HermitianMatrix::diagonal(d), 0.1);
    FAIL("expected SpectralFloorViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SpectralFloorViolation);
    CHECK(e.witness() == doctest::Approx(0.05));
  }
  CHECK_THROWS_AS(psd_inv_sqrt(HermitianMatrix::identity(2), 0.0), Error);
}

TEST_CASE("Hermitian construction validates its input") {
  CMatrix m(2, 2);
  m << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(HermitianMatrix::from(m), Error);
  CHECK_THROWS_AS(HermitianMatrix::from(CMatrix::Zero(2, 3)), Error);
  const HermitianMatrix s = HermitianMatrix::symmetrized(m);
  CHECK(max_abs(s.matrix() - s.matrix().adjoint()) == 0.0);
}

TEST_CASE("norms agree with their definitions") {
  Rng rng(15);
  for (int i = 0; i < 20; ++i) {
    const int n = 1 + i % 4;
    const CMatrix a = random_gaussian(rng, n, n);
    // |a|^2 is the top eigenvalue of a* a.
    const SpectralDecomposition sd = eig_herm(HermitianMatrix::symmetrized(a.adjoint() * a));
    CHECK(op_norm(a) == doctest::Approx(std::sqrt(sd.eigenvalues(n - 1))).epsilon(1e-10));
    double tn = 0.0;
    for (int k = 0; k < n; ++k) tn += std::sqrt(std::max(0.0, sd.eigenvalues(k)));
    CHECK(trace_norm(a) == doctest::Approx(tn).epsilon(1e-10));
    CHECK(op_norm(a) <= trace_norm(a) + 1e-12);
    const HermitianMatrix p = random_psd(rng, n, 0.0, 1.0);
    CHECK(trace_norm(p) == doctest::Approx(p.matrix().trace().real()).epsilon(1e-10));
  }
  CHECK(op_norm(random_unitary(rng, 4)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("is_psd reports an eigenvector witness") {
  Rng rng(16);
  const CMatrix u = random_unitary(rng, 3);
  RVector d(3);
  d << -0.5, 0.2, 1.0;
  const HermitianMatrix a = HermitianMatrix::symmetrized(u * d.cast<Complex>().asDiagonal() * u.adjoint());
  const PsdCheck c = is_psd(a, 1e-12);
  CHECK_FALSE(c.psd);
  CHECK(c.lambda_min == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK((a.matrix() * c.witness - c.lambda_min * c.witness).norm() < 1e-12);
  CHECK(is_psd(HermitianMatrix::identity(3), 0.0).psd);
}

TEST_CASE("normalized trace and matrix units") {
  CHECK(normalized_trace(CMatrix::Identity(5, 5)) == Complex(1.0, 0.0));
  const CMatrix e = matrix_unit(3, 0, 2);
  CHECK(e(0, 2) == Complex(1.0, 0.0));
  CHECK(e.cwiseAbs().sum() == 1.0);
  CHECK(max_abs(matrix_unit(3, 0, 1) * matrix_unit(3, 1, 2) - e) == 0.0);
}

TEST_CASE("random generators respect their spectra") {
  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    const HermitianMatrix p = random_psd(rng, 3, 0.1, 2.0);
    const RVector ev = eig_herm(p).eigenvalues;
    CHECK(ev(0) >= 0.1 - 1e-12);
    CHECK(ev(2) <= 2.0 + 1e-12);
    const HermitianMatrix g = random_unit_trace_density(rng, 3, 0.1, 2.0);
    CHECK(normalized_trace(g).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(op_norm(random_contraction(rng, 3)) <= 1.0 + 1e-12);
  }
}
