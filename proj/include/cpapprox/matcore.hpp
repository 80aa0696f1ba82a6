/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

// Dense Hermitian kernel: spectral decompositions, operator square roots,
// positivity tests and norms. All spectral functions go through eig_herm.

#include <complex>

#include <Eigen/Dense>

namespace cpapprox {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Eigenvalues above -kPsdClamp count as roundoff and are clamped to zero.
inline constexpr double kPsdClamp = 1e-10;

class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  // Accepts `m` if it is Hermitian within tol * max(1, |m|_max), then
  // symmetrizes. Throws Dimension/InvalidArgument otherwise.
  static HermitianMatrix from(const CMatrix& m, double tol = 1e-12);
  // (m + m*) / 2 without any check.
  static HermitianMatrix symmetrized(const CMatrix& m);
  static HermitianMatrix identity(int n);
  static HermitianMatrix diagonal(const RVector& d);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const noexcept { return m_; }
  operator const CMatrix&() const noexcept { return m_; }

 private:
  explicit HermitianMatrix(CMatrix m) : m_(std::move(m)) {}
  CMatrix m_;
};

struct SpectralDecomposition {
  RVector eigenvalues;  // ascending
  CMatrix eigenvectors; // columns, unitary

  CMatrix reconstruct() const;
  // U f(diag(lambda)) U*
  template <class F>
  CMatrix apply(F&& f) const {
    CVector d(eigenvalues.size());
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) d(i) = f(eigenvalues(i));
    return eigenvectors * d.asDiagonal() * eigenvectors.adjoint();
  }
};

SpectralDecomposition eig_herm(const HermitianMatrix& a);

double lambda_min(const HermitianMatrix& a);

HermitianMatrix psd_sqrt(const HermitianMatrix& a);

// a^{-1/2}; requires lambda_min(a) >= floor (SpectralFloorViolation otherwise).
HermitianMatrix psd_inv_sqrt(const HermitianMatrix& a, double floor);

// Largest singular value.
double op_norm(const CMatrix& a);

// Sum of singular values.
double trace_norm(const CMatrix& a);

struct PsdCheck {
  bool psd = false;
  double lambda_min = 0.0;
  CVector witness;  // eigenvector for lambda_min
};

PsdCheck is_psd(const HermitianMatrix& a, double tol);

// Normalized trace, tau(identity) = 1.
Complex normalized_trace(const CMatrix& a);

// Matrix unit e_ij of size n (0-based indices).
CMatrix matrix_unit(int n, int i, int j);

}  // namespace cpapprox
