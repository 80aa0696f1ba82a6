/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

// Linear maps on M_n (x) C^m stored per (output point, input point) pair.
//
// Each component is an n^2 x n^2 matrix K acting on row-major vectorized
// matrices: vec(x)[a*n + b] = x(a, b), apply(h)_k = sum_j unvec(K_kj vec(h_j)).
// Components that are not stored are zero.
//
// Complete positivity is decided per component. M_n (x) C^m is the direct sum
// of m copies of M_n cut out by orthogonal central projections, so a map into
// the k-th summand is CP iff its restriction to every j-th summand is.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpapprox/gridalg.hpp"

namespace cpapprox {

using ComponentKey = std::pair<int, int>;  // (output point k, input point j)

class GridMap {
 public:
  GridMap(int n, Grid grid);

  static GridMap identity(int n, const Grid& grid);
  static GridMap zero(int n, const Grid& grid) { return GridMap(n, grid); }

  int n() const noexcept { return n_; }
  const Grid& grid() const noexcept { return grid_; }
  const std::map<ComponentKey, CMatrix>& components() const noexcept { return components_; }

  // nullptr when the component is zero.
  const CMatrix* component(int k, int j) const;
  void set_component(int k, int j, CMatrix kmat);
  // component(k, j) += kmat
  void add_component(int k, int j, const CMatrix& kmat);

  // Optional structure tag ("dense", "diagonal", "cell-block") and the cells
  // whose (k, j) pairs may be nonzero for "cell-block".
  std::string structure = "dense";
  std::vector<std::vector<int>> cell_blocks;
  std::optional<std::size_t> rank_bound;

 private:
  void check_index(int k, int j) const;

  int n_;
  Grid grid_;
  std::map<ComponentKey, CMatrix> components_;
};

// a*S + b*T
GridMap combine(double a, const GridMap& s, double b, const GridMap& t);

MatrixFunction apply(const GridMap& s, const MatrixFunction& h);

// Row-major vectorization helpers.
CVector vec(const CMatrix& x);
CMatrix unvec(const CVector& v, int n);

// n^2 x n^2 matrix of x -> a x b.
CMatrix sandwich_matrix(const CMatrix& a, const CMatrix& b);
// n^2 x n^2 matrix of x -> c x c*.
CMatrix congruence_matrix(const CMatrix& c);

// Choi matrix C[(a,b),(c,d)] = (Phi(e_ac))_{bd} of the component map Phi
// given by its n^2 x n^2 matrix.
CMatrix choi_matrix(const CMatrix& kmat, int n);
CMatrix component_choi(const GridMap& s, int k, int j);

struct UcpReport {
  double unitality_defect = 0.0;
  double min_choi_eigenvalue = 0.0;
  double hermiticity_defect = 0.0;  // max |C - C*| over component Choi matrices
  bool is_ucp = false;
  ComponentKey worst_component{0, 0};
};

UcpReport verify_ucp(const GridMap& s, double tol);

// Largest sup_norm(S(b (x) f) - b (x) f) over the given pairs and extra
// elements. This is a lower estimate of the defect on the unit ball.
double defect_probe(const GridMap& s, const std::vector<GridFunction>& funcs,
                    const std::vector<CMatrix>& probes, const std::vector<MatrixFunction>& extra = {});

// Dense (n^2 m) x (n^2 m) matrix; small maps only.
CMatrix assemble(const GridMap& s);

// Numerical rank of the assembled map (singular values <= cutoff dropped).
// Works block by block over connected components of the (k, j) support graph.
std::size_t numerical_rank(const GridMap& s, double cutoff);

// id_{M_p} (x) S applied to an element of M_p (x) M_n (x) C^m given as one
// (p n) x (p n) matrix per grid point, ordered with the M_p index outermost.
std::vector<CMatrix> amplify_apply(const GridMap& s, const std::vector<CMatrix>& x, int p);

}  // namespace cpapprox
