/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

// Block-form normalization of UCP state-preserving maps for diagonal states.
//
// Starting from S, the pipeline builds
//
//   S~(x) = sum_{i,j} e_ii S(e_ii x e_jj) e_jj                  (compress_blocks)
//   R     = S~ + sum_k T_k,
//   T_k(x) = phi(e_kk x e_kk - e_kk S(e_kk x e_kk) e_kk) / phi(e_kk) e_kk (x) 1
//                                                               (add_corrections)
//   R~(x) = V R(x) V + sum_k D_k(x),  V = diag(|R(e_kk (x) 1)|^{-1/2})
//   D_k(x) = phi(e_kk x e_kk) / phi(e_kk) (e_kk (x) 1 - R(e_kk (x) 1) / |R(e_kk (x) 1)|)
//                                                               (renormalize)
//
// R~ maps every corner e_ij (x) C^m into itself, so it is determined by n^2
// scalar maps R_ij on C^m.
//
// D_k leaves out the term R(e_kk x e_kk) / |R(e_kk)| that also appears in
// the usual statement of this construction. That term is already the kk
// corner of V R(x) V, and adding it a second time makes the result non-unital.
// RenormalizeForm::Literal keeps it so the defect can be measured.

#include <optional>
#include <vector>

#include "cpapprox/blockmap.hpp"
#include "cpapprox/states.hpp"

namespace cpapprox {

class BlockFormMap {
 public:
  BlockFormMap(int n, Grid grid);  // zero map

  int n() const noexcept { return n_; }
  const Grid& grid() const noexcept { return grid_; }

  // R_ab as an m x m matrix: R_ab(f)(p) = sum_j corner(a, b)(p, j) f(j).
  const CMatrix& corner(int a, int b) const;
  CMatrix& corner(int a, int b);

  GridMap to_grid_map() const;
  // Throws Precondition (tag "block-form") when some component has an entry
  // outside its diagonal larger than tol * max(1, |K|_max).
  static BlockFormMap from_grid_map(const GridMap& s, double tol = 1e-12);

 private:
  int n_;
  Grid grid_;
  std::vector<CMatrix> corners_;  // a * n + b
};

MatrixFunction apply(const BlockFormMap& r, const MatrixFunction& h);

// Largest entry of any component that moves one corner into another.
double block_leakage(const GridMap& s);

// max |R_ba - conj(R_ab)| over all corner pairs.
double hermitian_symmetry_defect(const BlockFormMap& r);

// UCP test on the corner form: component (p, j) is CP iff the n x n matrix
// [R_ab(p, j)] is PSD.
UcpReport verify_ucp(const BlockFormMap& r, double tol);

// Exact sup over the unit ball of |phi(R(x)) - phi(x)| for a diagonal phi.
double preservation_defect(const BlockFormMap& r, const State& phi);

GridMap compress_blocks(const GridMap& s);

struct CorrectionOptions {
  double tol = 1e-7;  // tolerated negativity of the correction functionals
};

// R = S~ + sum_k T_k. Throws Precondition when phi is not diagonal or some
// phi(e_kk) = 0, and Precondition (tag "phi-preservation") when a correction
// functional is negative beyond tol, which happens only if S does not
// preserve phi.
GridMap add_corrections(const GridMap& compressed, const GridMap& s, const State& phi,
                        const CorrectionOptions& opts = {});

enum class RenormalizeForm { Corrected, Literal };

// Throws DegenerateCorner when some R(e_kk (x) 1) vanishes.
BlockFormMap renormalize(const GridMap& r, const State& phi,
                         RenormalizeForm form = RenormalizeForm::Corrected);

struct ReformulationDiagnostics {
  double input_preservation_defect = 0.0;
  double input_unitality_defect = 0.0;
  double unitality_defect = 0.0;
  double min_choi_eigenvalue = 0.0;
  double preservation_defect = 0.0;
  double block_leakage = 0.0;
  double symmetry_defect = 0.0;
  // max over probes h of |R~(h) - h| / max_{a,b} |S(h_ab) - h_ab|, where h_ab
  // are the corner pieces of h; nullopt when no probe has a nonzero
  // denominator.
  std::optional<double> amplification;
  std::vector<double> corner_norms;  // |R(e_kk (x) 1)|
};

struct ReformulationOptions {
  RenormalizeForm form = RenormalizeForm::Corrected;
  double input_tol = 1e-7;  // UCP and phi-preservation of S
  std::vector<MatrixFunction> probes;
};

struct Reformulation {
  BlockFormMap map;
  ReformulationDiagnostics diagnostics;
};

Reformulation reformulate(const GridMap& s, const State& phi, const ReformulationOptions& opts = {});

}  // namespace cpapprox
