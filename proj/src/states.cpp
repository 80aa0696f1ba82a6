/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "cpapprox/states.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "cpapprox/error.hpp"

namespace cpapprox {

State make_state(const Grid& grid, RVector mu, std::vector<CMatrix> g) {
  const int m = grid.size();
  require_dims(mu.size() == m, "make_state: mu length does not match grid");
  require_dims(static_cast<int>(g.size()) == m, "make_state: one density matrix per grid point expected");
  const int n = static_cast<int>(g.front().rows());
  for (const auto& gj : g) require_dims(gj.rows() == n && gj.cols() == n, "make_state: density matrices must be n x n");
  for (int j = 0; j < m; ++j) {
    if (!(mu(j) >= 0.0) || !std::isfinite(mu(j))) fail(ErrorCode::NotAState, "make_state: negative or non-finite weight", mu(j));
  }
  const double total = mu.sum();
  if (!(total > 0.0)) fail(ErrorCode::NotAState, "make_state: weights sum to zero");

  State phi(n, grid);
  std::string note;
  if (std::abs(total - 1.0) > 1e-15) {
    mu /= total;
    note += "mu rescaled by 1/" + std::to_string(total) + "; ";
  }
  double norm_const = 0.0;
  for (int j = 0; j < m; ++j) {
    if (mu(j) == 0.0) continue;
    const HermitianMatrix h = HermitianMatrix::from(g[j], 1e-12);
    g[j] = h.matrix();
    const double scale = std::max(1.0, op_norm(g[j]));
    const double lmin = lambda_min(h);
    if (lmin < -kPsdClamp * scale) {
      fail(ErrorCode::NotAState, "make_state: density at point " + std::to_string(j) + " has eigenvalue " +
                                     std::to_string(lmin), lmin);
    }
    norm_const += mu(j) * normalized_trace(g[j]).real();
  }
  if (!(norm_const > 0.0)) fail(ErrorCode::NotAState, "make_state: state vanishes on the unit", norm_const);
  if (std::abs(norm_const - 1.0) > 1e-12) {
    for (auto& gj : g) gj /= norm_const;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", norm_const);
    note += std::string("g rescaled by 1/") + buf + "; ";
  }
  phi.mu_ = std::move(mu);
  phi.g_ = std::move(g);
  phi.provenance_ = note;
  return phi;
}

Complex eval_state(const State& phi, const MatrixFunction& h) {
  require_dims(h.n == phi.n() && h.grid == phi.grid(), "eval_state: shape mismatch");
  Complex acc = 0.0;
  for (int j = 0; j < phi.grid().size(); ++j) {
    if (phi.mu()(j) == 0.0) continue;
    acc += phi.mu()(j) * (phi.g()[j] * h.values[j]).trace();
  }
  return acc / static_cast<double>(phi.n());
}

CMatrix cond_exp(const State& phi, const MatrixFunction& h) {
  require_dims(h.n == phi.n() && h.grid == phi.grid(), "cond_exp: shape mismatch");
  CMatrix e = CMatrix::Zero(h.n, h.n);
  for (int j = 0; j < phi.grid().size(); ++j) e += phi.mu()(j) * h.values[j];
  return e;
}

bool is_diagonal(const State& phi, double tol) {
  for (int j = 0; j < phi.grid().size(); ++j) {
    if (phi.mu()(j) == 0.0) continue;
    const CMatrix& gj = phi.g()[j];
    const double scale = std::max(1.0, gj.cwiseAbs().maxCoeff());
    for (int a = 0; a < phi.n(); ++a)
      for (int b = 0; b < phi.n(); ++b)
        if (a != b && std::abs(gj(a, b)) > tol * scale) return false;
  }
  return true;
}

double faithfulness_margin(const State& phi) {
  double margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < phi.grid().size(); ++j) {
    if (phi.mu()(j) == 0.0) continue;
    margin = std::min(margin, lambda_min(HermitianMatrix::symmetrized(phi.g()[j])));
  }
  return margin;
}

double preservation_defect(const GridMap& s, const State& phi) {
  require_dims(s.n() == phi.n() && s.grid() == phi.grid(), "preservation_defect: shape mismatch");
  const int n = phi.n();
  const int m = phi.grid().size();
  // w_k = vec(mu_k g_k^T / n), so that phi(h) = sum_k w_k . vec(h_k).
  std::vector<CVector> w(m);
  for (int k = 0; k < m; ++k) w[k] = vec(CMatrix(phi.mu()(k) * phi.g()[k].transpose() / static_cast<double>(n)));
  std::vector<CVector> u(m);
  for (int j = 0; j < m; ++j) u[j] = -w[j];
  for (const auto& [key, kmat] : s.components()) u[key.second].noalias() += kmat.transpose() * w[key.first];
  double total = 0.0;
  for (int j = 0; j < m; ++j) total += trace_norm(unvec(u[j], n));
  return total;
}

GridMap state_projection(const State& phi) {
  const int n = phi.n();
  const int m = phi.grid().size();
  GridMap s(n, phi.grid());
  for (int j = 0; j < m; ++j) {
    if (phi.mu()(j) == 0.0) continue;
    const CVector w = vec(CMatrix(phi.mu()(j) * phi.g()[j].transpose() / static_cast<double>(n)));
    CMatrix kmat = CMatrix::Zero(n * n, n * n);
    for (int a = 0; a < n; ++a) kmat.row(a * n + a) = w.transpose();
    for (int p = 0; p < m; ++p) s.set_component(p, j, kmat);
  }
  return s;
}

std::vector<int> PatternSet::members() const {
  std::vector<int> out;
  for (int j = 0; j < size(); ++j)
    if (member[j]) out.push_back(j);
  return out;
}

PatternSet balanced_pattern(int level, int balance_level) {
  if (level < 1 || level > 24) fail(ErrorCode::PatternScale, "balanced_pattern: level must lie in [1, 24]", level);
  if (balance_level < 0 || balance_level >= level) {
    fail(ErrorCode::PatternScale, "balanced_pattern: balance level must satisfy 0 <= L0 < L", balance_level);
  }
  PatternSet x;
  x.level = level;
  x.balance_level = balance_level;
  x.member.assign(std::size_t{1} << level, false);
  for (std::size_t j = 0; j < x.member.size(); j += 2) x.member[j] = true;
  return x;
}

bool pattern_is_balanced(const PatternSet& x) {
  if (x.size() != (1 << x.level)) return false;
  for (int l = 0; l <= x.balance_level; ++l) {
    const int width = x.size() >> l;
    for (int start = 0; start < x.size(); start += width) {
      int count = 0;
      for (int j = start; j < start + width; ++j) count += x.member[j] ? 1 : 0;
      if (2 * count != width) return false;
    }
  }
  return true;
}

State rudin_state(const PatternSet& x) {
  const Grid grid = Grid::dyadic(x.level);
  const int m = grid.size();
  RVector mu = RVector::Constant(m, 1.0 / m);
  std::vector<CMatrix> g(m, CMatrix::Zero(2, 2));
  for (int j = 0; j < m; ++j) g[j](x.member[j] ? 0 : 1, x.member[j] ? 0 : 1) = 2.0;
  return make_state(grid, std::move(mu), std::move(g));
}

}  // namespace cpapprox
