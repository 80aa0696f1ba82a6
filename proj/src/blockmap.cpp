/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "cpapprox/blockmap.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "cpapprox/error.hpp"

namespace cpapprox {

GridMap::GridMap(int n, Grid grid) : n_(n), grid_(grid) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "GridMap: n must be positive", n);
}

GridMap GridMap::identity(int n, const Grid& grid) {
  GridMap s(n, grid);
  const CMatrix id = CMatrix::Identity(n * n, n * n);
  for (int k = 0; k < grid.size(); ++k) s.set_component(k, k, id);
  s.structure = "diagonal";
  return s;
}

void GridMap::check_index(int k, int j) const {
  if (k < 0 || j < 0 || k >= grid_.size() || j >= grid_.size()) {
    fail(ErrorCode::InvalidArgument, "GridMap: component index out of range");
  }
}

const CMatrix* GridMap::component(int k, int j) const {
  check_index(k, j);
  auto it = components_.find({k, j});
  return it == components_.end() ? nullptr : &it->second;
}

void GridMap::set_component(int k, int j, CMatrix kmat) {
  check_index(k, j);
  require_dims(kmat.rows() == n_ * n_ && kmat.cols() == n_ * n_, "GridMap: component must be n^2 x n^2");
  components_[{k, j}] = std::move(kmat);
}

void GridMap::add_component(int k, int j, const CMatrix& kmat) {
  check_index(k, j);
  require_dims(kmat.rows() == n_ * n_ && kmat.cols() == n_ * n_, "GridMap: component must be n^2 x n^2");
  auto [it, inserted] = components_.try_emplace({k, j}, kmat);
  if (!inserted) it->second += kmat;
}

GridMap combine(double a, const GridMap& s, double b, const GridMap& t) {
  require_dims(s.n() == t.n() && s.grid() == t.grid(), "combine: shape mismatch");
  GridMap out(s.n(), s.grid());
  for (const auto& [key, kmat] : s.components()) out.add_component(key.first, key.second, a * kmat);
  for (const auto& [key, kmat] : t.components()) out.add_component(key.first, key.second, b * kmat);
  out.structure = s.structure == t.structure ? s.structure : "dense";
  return out;
}

CVector vec(const CMatrix& x) {
  const auto n = x.rows();
  CVector v(n * x.cols());
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < x.cols(); ++b) v(a * x.cols() + b) = x(a, b);
  return v;
}

CMatrix unvec(const CVector& v, int n) {
  CMatrix x(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) x(a, b) = v(a * n + b);
  return x;
}

MatrixFunction apply(const GridMap& s, const MatrixFunction& h) {
  require_dims(h.n == s.n() && h.grid == s.grid(), "apply: shape mismatch");
  const int n = s.n();
  const int m = s.grid().size();
  std::vector<CVector> in(m);
  for (int j = 0; j < m; ++j) in[j] = vec(h.values[j]);
  std::vector<CVector> out(m, CVector::Zero(n * n));
  for (const auto& [key, kmat] : s.components()) out[key.first].noalias() += kmat * in[key.second];
  MatrixFunction r(n, h.grid);
  for (int k = 0; k < m; ++k) r.values[k] = unvec(out[k], n);
  return r;
}

CMatrix sandwich_matrix(const CMatrix& a, const CMatrix& b) {
  const auto n = a.rows();
  require_dims(a.cols() == n && b.rows() == n && b.cols() == n, "sandwich_matrix: square n x n factors expected");
  CMatrix k(n * n, n * n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index s = 0; s < n; ++s)
      for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index d = 0; d < n; ++d) k(r * n + s, c * n + d) = a(r, c) * b(d, s);
  return k;
}

CMatrix congruence_matrix(const CMatrix& c) { return sandwich_matrix(c, c.adjoint()); }

CMatrix choi_matrix(const CMatrix& kmat, int n) {
  CMatrix choi(n * n, n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) choi(a * n + b, c * n + d) = kmat(b * n + d, a * n + c);
  return choi;
}

CMatrix component_choi(const GridMap& s, int k, int j) {
  const CMatrix* kmat = s.component(k, j);
  const int n = s.n();
  if (kmat == nullptr) return CMatrix::Zero(n * n, n * n);
  return choi_matrix(*kmat, n);
}

UcpReport verify_ucp(const GridMap& s, double tol) {
  UcpReport rep;
  const MatrixFunction unit = MatrixFunction::unit(s.n(), s.grid());
  rep.unitality_defect = sup_norm(apply(s, unit) - unit);

  const auto m = static_cast<std::size_t>(s.grid().size());
  bool first = true;
  for (const auto& [key, kmat] : s.components()) {
    const CMatrix choi = choi_matrix(kmat, s.n());
    rep.hermiticity_defect = std::max(rep.hermiticity_defect, (choi - choi.adjoint()).cwiseAbs().maxCoeff());
    const double lmin = lambda_min(HermitianMatrix::symmetrized(choi));
    if (first || lmin < rep.min_choi_eigenvalue) {
      rep.min_choi_eigenvalue = lmin;
      rep.worst_component = key;
      first = false;
    }
  }
  // Omitted components are zero maps, whose Choi spectrum is {0}.
  if (s.components().size() < m * m) rep.min_choi_eigenvalue = std::min(rep.min_choi_eigenvalue, 0.0);
  rep.is_ucp = rep.unitality_defect <= tol && rep.min_choi_eigenvalue >= -tol && rep.hermiticity_defect <= tol;
  return rep;
}

double defect_probe(const GridMap& s, const std::vector<GridFunction>& funcs, const std::vector<CMatrix>& probes,
                    const std::vector<MatrixFunction>& extra) {
  double worst = 0.0;
  for (const auto& b : probes) {
    if (op_norm(b) > 1.0 + 1e-12) fail(ErrorCode::InvalidArgument, "defect_probe: probe norm exceeds 1", op_norm(b));
    for (const auto& f : funcs) {
      const MatrixFunction x = tensor_embed(b, f, s.grid());
      worst = std::max(worst, sup_norm(apply(s, x) - x));
    }
  }
  for (const auto& x : extra) worst = std::max(worst, sup_norm(apply(s, x) - x));
  return worst;
}

CMatrix assemble(const GridMap& s) {
  const int nn = s.n() * s.n();
  const int m = s.grid().size();
  CMatrix a = CMatrix::Zero(nn * m, nn * m);
  for (const auto& [key, kmat] : s.components()) a.block(key.first * nn, key.second * nn, nn, nn) = kmat;
  return a;
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int size) : parent(size) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

namespace {
constexpr Eigen::Index kJacobiColumns = 640;
}  // namespace

std::size_t numerical_rank(const GridMap& s, double cutoff) {
  const int nn = s.n() * s.n();
  const int m = s.grid().size();
  // Nodes 0..m-1 are outputs, m..2m-1 inputs.
  DisjointSets sets(2 * m);
  for (const auto& [key, kmat] : s.components()) sets.unite(key.first, m + key.second);

  std::map<int, std::pair<std::vector<int>, std::vector<int>>> groups;
  for (int k = 0; k < m; ++k) groups[sets.find(k)].first.push_back(k);
  for (int j = 0; j < m; ++j) groups[sets.find(m + j)].second.push_back(j);

  std::size_t rank = 0;
  for (const auto& [root, members] : groups) {
    const auto& [outs, ins] = members;
    if (outs.empty() || ins.empty()) continue;
    std::map<int, int> row_of, col_of;
    for (std::size_t i = 0; i < outs.size(); ++i) row_of[outs[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < ins.size(); ++i) col_of[ins[i]] = static_cast<int>(i);
    CMatrix block = CMatrix::Zero(static_cast<Eigen::Index>(outs.size()) * nn, static_cast<Eigen::Index>(ins.size()) * nn);
    for (const auto& [key, kmat] : s.components()) {
      auto r = row_of.find(key.first);
      if (r == row_of.end()) continue;
      auto c = col_of.find(key.second);
      if (c == col_of.end()) continue;
      block.block(r->second * nn, c->second * nn, nn, nn) = kmat;
    }
    // BDCSVD loses the small singular values of some complex blocks; Jacobi
    // is accurate and fast enough below a few hundred columns.
    RVector sv;
    if (block.cols() <= kJacobiColumns) {
      sv = Eigen::JacobiSVD<CMatrix>(block).singularValues();
    } else {
      sv = Eigen::BDCSVD<CMatrix>(block).singularValues();
    }
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

std::vector<CMatrix> amplify_apply(const GridMap& s, const std::vector<CMatrix>& x, int p) {
  const int n = s.n();
  const int m = s.grid().size();
  require_dims(static_cast<int>(x.size()) == m, "amplify_apply: one matrix per grid point expected");
  std::vector<std::vector<CVector>> in(m, std::vector<CVector>(p * p));
  for (int j = 0; j < m; ++j) {
    require_dims(x[j].rows() == p * n && x[j].cols() == p * n, "amplify_apply: (p n) x (p n) matrices expected");
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) in[j][a * p + b] = vec(x[j].block(a * n, b * n, n, n));
  }
  std::vector<CMatrix> out(m, CMatrix::Zero(p * n, p * n));
  for (const auto& [key, kmat] : s.components()) {
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b)
        out[key.first].block(a * n, b * n, n, n) += unvec(kmat * in[key.second][a * p + b], n);
  }
  return out;
}

}  // namespace cpapprox
