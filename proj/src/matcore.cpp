/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "cpapprox/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpapprox/error.hpp"

namespace cpapprox {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Dimension: return "DimensionError";
    case ErrorCode::NotPsd: return "NotPSD";
    case ErrorCode::SpectralFloorViolation: return "SpectralFloorViolation";
    case ErrorCode::NotAState: return "NotAState";
    case ErrorCode::NotGridFaithful: return "NotGridFaithful";
    case ErrorCode::RangeCellTooCoarse: return "RangeCellTooCoarse";
    case ErrorCode::Precondition: return "PreconditionError";
    case ErrorCode::DegenerateCorner: return "DegenerateCorner";
    case ErrorCode::PatternScale: return "PatternScaleError";
    case ErrorCode::Cover: return "CoverError";
    case ErrorCode::Convergence: return "ConvergenceError";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Internal: return "InternalError";
  }
  return "UnknownError";
}

HermitianMatrix HermitianMatrix::from(const CMatrix& m, double tol) {
  require_dims(m.rows() == m.cols() && m.rows() > 0, "HermitianMatrix: matrix must be square and nonempty");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol * scale) {
    fail(ErrorCode::InvalidArgument,
         "HermitianMatrix: input not Hermitian (asymmetry " + std::to_string(asym) + ")", asym);
  }
  return symmetrized(m);
}

HermitianMatrix HermitianMatrix::symmetrized(const CMatrix& m) {
  require_dims(m.rows() == m.cols(), "HermitianMatrix: matrix must be square");
  return HermitianMatrix(CMatrix(0.5 * (m + m.adjoint())));
}

HermitianMatrix HermitianMatrix::identity(int n) {
  return HermitianMatrix(CMatrix::Identity(n, n));
}

HermitianMatrix HermitianMatrix::diagonal(const RVector& d) {
  return HermitianMatrix(CMatrix(d.cast<Complex>().asDiagonal()));
}

CMatrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

SpectralDecomposition eig_herm(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    // Best-effort residual for the diagnostic.
    const CMatrix& u = solver.eigenvectors();
    double residual = std::numeric_limits<double>::infinity();
    if (u.size() == a.matrix().size()) {
      residual = op_norm(u * solver.eigenvalues().cast<Complex>().asDiagonal() * u.adjoint() - a.matrix());
    }
    fail(ErrorCode::Convergence, "eig_herm: eigensolver did not converge", residual);
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double lambda_min(const HermitianMatrix& a) {
  if (a.dim() == 2) {
    const CMatrix& m = a.matrix();
    const double p = m(0, 0).real();
    const double q = m(1, 1).real();
    const double h = 0.5 * (p - q);
    return 0.5 * (p + q) - std::sqrt(h * h + std::norm(m(0, 1)));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorCode::Convergence, "lambda_min: eigensolver did not converge");
  return solver.eigenvalues()(0);
}

HermitianMatrix psd_sqrt(const HermitianMatrix& a) {
  const SpectralDecomposition sd = eig_herm(a);
  const double lmin = sd.eigenvalues(0);
  if (lmin < -kPsdClamp) {
    fail(ErrorCode::NotPsd, "psd_sqrt: matrix has eigenvalue " + std::to_string(lmin), lmin);
  }
  CVector d(sd.eigenvalues.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::sqrt(std::max(0.0, sd.eigenvalues(i)));
#ifdef CPAPPROX_MUTATION_PSD_SQRT_SIGN
  // Mutation-testing build only: sign error on the top eigenvalue.
  d(d.size() - 1) = -d(d.size() - 1);
#endif
  return HermitianMatrix::symmetrized(sd.eigenvectors * d.asDiagonal() * sd.eigenvectors.adjoint());
}

HermitianMatrix psd_inv_sqrt(const HermitianMatrix& a, double floor) {
  if (!(floor > 0.0)) fail(ErrorCode::InvalidArgument, "psd_inv_sqrt: floor must be positive", floor);
  const SpectralDecomposition sd = eig_herm(a);
  const double lmin = sd.eigenvalues(0);
  if (lmin < floor) {
    fail(ErrorCode::SpectralFloorViolation,
         "psd_inv_sqrt: lambda_min " + std::to_string(lmin) + " below floor " + std::to_string(floor), lmin);
  }
  return HermitianMatrix::symmetrized(sd.apply([](double x) { return Complex(1.0 / std::sqrt(x), 0.0); }));
}

double op_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double trace_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues().sum();
}

PsdCheck is_psd(const HermitianMatrix& a, double tol) {
  const SpectralDecomposition sd = eig_herm(a);
  PsdCheck out;
  out.lambda_min = sd.eigenvalues(0);
  out.witness = sd.eigenvectors.col(0);
  out.psd = out.lambda_min >= -tol;
  return out;
}

Complex normalized_trace(const CMatrix& a) {
  return a.trace() / static_cast<double>(a.rows());
}

CMatrix matrix_unit(int n, int i, int j) {
  CMatrix e = CMatrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

}  // namespace cpapprox
