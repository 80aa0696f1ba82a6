/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "cpapprox/reformulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpapprox/error.hpp"

namespace cpapprox {

namespace {

// phi(e_kk x e_kk) = sum_j weights(j) x_j(k, k) for a diagonal phi.
RVector corner_weights(const State& phi, int k) {
  const int m = phi.grid().size();
  RVector w(m);
  for (int j = 0; j < m; ++j) w(j) = phi.mu()(j) * phi.g()[j](k, k).real() / phi.n();
  return w;
}

void require_diagonal_state(const State& phi, const char* where) {
  if (!is_diagonal(phi)) {
    fail(ErrorCode::Precondition, std::string(where) + ": state is not diagonal", 0.0, "diagonal");
  }
  for (int k = 0; k < phi.n(); ++k) {
    const double mass = corner_weights(phi, k).sum();
    if (!(mass > 0.0)) {
      fail(ErrorCode::Precondition, std::string(where) + ": phi(e_kk) vanishes for k = " + std::to_string(k), mass,
           "corner-faithful");
    }
  }
}

}  // namespace

BlockFormMap::BlockFormMap(int n, Grid grid) : n_(n), grid_(grid) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "BlockFormMap: n must be positive", n);
  corners_.assign(static_cast<std::size_t>(n) * n, CMatrix::Zero(grid_.size(), grid_.size()));
}

const CMatrix& BlockFormMap::corner(int a, int b) const {
  if (a < 0 || b < 0 || a >= n_ || b >= n_) fail(ErrorCode::InvalidArgument, "BlockFormMap: corner out of range");
  return corners_[a * n_ + b];
}

CMatrix& BlockFormMap::corner(int a, int b) {
  if (a < 0 || b < 0 || a >= n_ || b >= n_) fail(ErrorCode::InvalidArgument, "BlockFormMap: corner out of range");
  return corners_[a * n_ + b];
}

GridMap BlockFormMap::to_grid_map() const {
  const int m = grid_.size();
  const int nn = n_ * n_;
  GridMap s(n_, grid_);
  for (int p = 0; p < m; ++p)
    for (int j = 0; j < m; ++j) {
      CVector d(nn);
      bool any = false;
      for (int c = 0; c < nn; ++c) {
        d(c) = corners_[c](p, j);
        any = any || d(c) != 0.0;
      }
      if (any) s.set_component(p, j, d.asDiagonal());
    }
  s.structure = "block-form";
  return s;
}

BlockFormMap BlockFormMap::from_grid_map(const GridMap& s, double tol) {
  const int n = s.n();
  const int nn = n * n;
  BlockFormMap r(n, s.grid());
  for (const auto& [key, kmat] : s.components()) {
    const double scale = std::max(1.0, kmat.cwiseAbs().maxCoeff());
    for (int a = 0; a < nn; ++a)
      for (int c = 0; c < nn; ++c) {
        if (a == c) continue;
        const double leak = std::abs(kmat(a, c));
        if (leak > tol * scale) {
          fail(ErrorCode::Precondition,
               "BlockFormMap: component (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                   ") moves one corner into another",
               leak, "block-form");
        }
      }
    for (int c = 0; c < nn; ++c) r.corners_[c](key.first, key.second) = kmat(c, c);
  }
  return r;
}

MatrixFunction apply(const BlockFormMap& r, const MatrixFunction& h) {
  require_dims(h.n == r.n() && h.grid == r.grid(), "apply: shape mismatch");
  MatrixFunction out(r.n(), r.grid());
  for (int a = 0; a < r.n(); ++a)
    for (int b = 0; b < r.n(); ++b) {
      const CVector v = r.corner(a, b) * corner_extract(h, a, b);
      for (int p = 0; p < r.grid().size(); ++p) out.values[p](a, b) = v(p);
    }
  return out;
}

double block_leakage(const GridMap& s) {
  const int nn = s.n() * s.n();
  double worst = 0.0;
  for (const auto& [key, kmat] : s.components())
    for (int a = 0; a < nn; ++a)
      for (int c = 0; c < nn; ++c)
        if (a != c) worst = std::max(worst, std::abs(kmat(a, c)));
  return worst;
}

double hermitian_symmetry_defect(const BlockFormMap& r) {
  double worst = 0.0;
  for (int a = 0; a < r.n(); ++a)
    for (int b = a; b < r.n(); ++b)
      worst = std::max(worst, (r.corner(b, a) - r.corner(a, b).conjugate()).cwiseAbs().maxCoeff());
  return worst;
}

UcpReport verify_ucp(const BlockFormMap& r, double tol) {
  const int n = r.n();
  const int m = r.grid().size();
  UcpReport rep;
  for (int a = 0; a < n; ++a) {
    const CVector row_sums = r.corner(a, a).rowwise().sum();
    for (int p = 0; p < m; ++p) rep.unitality_defect = std::max(rep.unitality_defect, std::abs(row_sums(p) - 1.0));
  }
  bool first = true;
  bool saw_zero = false;
  CMatrix c(n, n);
  for (int p = 0; p < m; ++p)
    for (int j = 0; j < m; ++j) {
      bool any = false;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          c(a, b) = r.corner(a, b)(p, j);
          any = any || c(a, b) != 0.0;
        }
      if (!any) {
        saw_zero = true;
        continue;
      }
      rep.hermiticity_defect = std::max(rep.hermiticity_defect, (c - c.adjoint()).cwiseAbs().maxCoeff());
      const double lmin = lambda_min(HermitianMatrix::symmetrized(c));
      if (first || lmin < rep.min_choi_eigenvalue) {
        rep.min_choi_eigenvalue = lmin;
        rep.worst_component = {p, j};
        first = false;
      }
    }
  if (saw_zero) rep.min_choi_eigenvalue = std::min(rep.min_choi_eigenvalue, 0.0);
  rep.is_ucp = rep.unitality_defect <= tol && rep.min_choi_eigenvalue >= -tol && rep.hermiticity_defect <= tol;
  return rep;
}

double preservation_defect(const BlockFormMap& r, const State& phi) {
  require_dims(r.n() == phi.n() && r.grid() == phi.grid(), "preservation_defect: shape mismatch");
  const int n = phi.n();
  const int m = phi.grid().size();
  std::vector<CMatrix> u(m, CMatrix::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      // phi(x) = sum_j sum_ab w_ab(j) x_j(a, b) with w_ab(j) = mu_j g_j(b, a) / n.
      CVector w(m);
      for (int j = 0; j < m; ++j) w(j) = phi.mu()(j) * phi.g()[j](b, a) / static_cast<double>(n);
      const CVector coeff = r.corner(a, b).transpose() * w - w;
      for (int j = 0; j < m; ++j) u[j](a, b) = coeff(j);
    }
  double total = 0.0;
  for (const auto& uj : u) total += trace_norm(uj);
  return total;
}

GridMap compress_blocks(const GridMap& s) {
  GridMap out(s.n(), s.grid());
  for (const auto& [key, kmat] : s.components()) {
    const CVector d = kmat.diagonal();
    if (d.cwiseAbs().maxCoeff() == 0.0) continue;
    out.set_component(key.first, key.second, d.asDiagonal());
  }
  out.structure = "block-form";
  return out;
}

GridMap add_corrections(const GridMap& compressed, const GridMap& s, const State& phi,
                        const CorrectionOptions& opts) {
  require_dims(compressed.n() == phi.n() && s.n() == phi.n() && s.grid() == phi.grid() &&
                   compressed.grid() == phi.grid(),
               "add_corrections: shape mismatch");
  require_diagonal_state(phi, "add_corrections");
  const int n = phi.n();
  const int m = phi.grid().size();
  const int nn = n * n;

  GridMap r = compressed;
  for (int k = 0; k < n; ++k) {
    const int kk = k * n + k;
    const RVector w = corner_weights(phi, k);
    const double mass = w.sum();
    // c_j = phi_k(j) - sum_p phi_k(p) S_pj[kk, kk]
    CVector c = w.cast<Complex>();
    for (const auto& [key, kmat] : s.components()) c(key.second) -= w(key.first) * kmat(kk, kk);
    for (int j = 0; j < m; ++j) {
      if (c(j).real() < -opts.tol || std::abs(c(j).imag()) > opts.tol) {
        fail(ErrorCode::Precondition,
             "add_corrections: correction functional for corner " + std::to_string(k) + " is negative at point " +
                 std::to_string(j) + "; the input map does not preserve the state",
             c(j).real(), "phi-preservation");
      }
    }
    for (int j = 0; j < m; ++j) {
      if (c(j) == 0.0) continue;
      CMatrix e = CMatrix::Zero(nn, nn);
      e(kk, kk) = c(j) / mass;
      for (int p = 0; p < m; ++p) r.add_component(p, j, e);
    }
  }
  r.structure = "block-form";
  return r;
}

BlockFormMap renormalize(const GridMap& r, const State& phi, RenormalizeForm form) {
  require_dims(r.n() == phi.n() && r.grid() == phi.grid(), "renormalize: shape mismatch");
  require_diagonal_state(phi, "renormalize");
  const int n = phi.n();
  const int m = phi.grid().size();
  const BlockFormMap in = BlockFormMap::from_grid_map(r);

  std::vector<CVector> corner_unit(n);  // R(e_kk (x) 1) in corner kk
  RVector norms(n);
  for (int k = 0; k < n; ++k) {
    corner_unit[k] = in.corner(k, k).rowwise().sum();
    norms(k) = corner_unit[k].cwiseAbs().maxCoeff();
    if (!(norms(k) > 0.0)) {
      fail(ErrorCode::DegenerateCorner, "renormalize: R(e_kk) vanishes for k = " + std::to_string(k), norms(k));
    }
  }

  BlockFormMap out(n, phi.grid());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) out.corner(a, b) = in.corner(a, b) / std::sqrt(norms(a) * norms(b));
  for (int k = 0; k < n; ++k) {
    const RVector w = corner_weights(phi, k);
    const double mass = w.sum();
    const CVector left = CVector::Ones(m) - corner_unit[k] / norms(k);
    out.corner(k, k) += left * (w / mass).cast<Complex>().transpose();
    if (form == RenormalizeForm::Literal) out.corner(k, k) += in.corner(k, k) / norms(k);
  }
  return out;
}

Reformulation reformulate(const GridMap& s, const State& phi, const ReformulationOptions& opts) {
  require_dims(s.n() == phi.n() && s.grid() == phi.grid(), "reformulate: shape mismatch");
  require_diagonal_state(phi, "reformulate");

  ReformulationDiagnostics diag;
  const UcpReport in_ucp = verify_ucp(s, opts.input_tol);
  diag.input_unitality_defect = in_ucp.unitality_defect;
  if (!in_ucp.is_ucp) {
    const double witness = in_ucp.unitality_defect > opts.input_tol ? in_ucp.unitality_defect
                                                                    : in_ucp.min_choi_eigenvalue;
    fail(ErrorCode::Precondition, "reformulate: input map is not UCP", witness, "UCP");
  }
  diag.input_preservation_defect = preservation_defect(s, phi);
  if (diag.input_preservation_defect > opts.input_tol) {
    fail(ErrorCode::Precondition, "reformulate: input map does not preserve the state",
         diag.input_preservation_defect, "phi-preservation");
  }

  const GridMap compressed = compress_blocks(s);
  const GridMap r = add_corrections(compressed, s, phi, {opts.input_tol});
  diag.block_leakage = block_leakage(r);
  BlockFormMap out = renormalize(r, phi, opts.form);

  const BlockFormMap r_blocks = BlockFormMap::from_grid_map(r);
  for (int k = 0; k < phi.n(); ++k) {
    const CVector unit = r_blocks.corner(k, k).rowwise().sum();
    diag.corner_norms.push_back(unit.cwiseAbs().maxCoeff());
  }
  const UcpReport ucp = verify_ucp(out, 0.0);
  diag.unitality_defect = ucp.unitality_defect;
  diag.min_choi_eigenvalue = ucp.min_choi_eigenvalue;
  diag.preservation_defect = preservation_defect(out, phi);
  diag.symmetry_defect = hermitian_symmetry_defect(out);

  const int n = phi.n();
  for (const auto& h : opts.probes) {
    const double num = sup_norm(apply(out, h) - h);
    double den = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        MatrixFunction piece(n, h.grid);
        for (int j = 0; j < h.grid.size(); ++j) piece.values[j](a, b) = h.values[j](a, b);
        den = std::max(den, sup_norm(apply(s, piece) - piece));
      }
    if (den > 0.0) diag.amplification = std::max(diag.amplification.value_or(0.0), num / den);
  }
  return {std::move(out), std::move(diag)};
}

}  // namespace cpapprox
