/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "cpapprox/gridalg.hpp"

#include <algorithm>
#include <string>

#include "cpapprox/error.hpp"

namespace cpapprox {

Grid::Grid(int m) : m_(m) {
  if (m < 1) fail(ErrorCode::InvalidArgument, "Grid: need at least one point", m);
  if ((m & (m - 1)) == 0) {
    int level = 0;
    while ((1 << level) < m) ++level;
    level_ = level;
  }
}

Grid Grid::dyadic(int level) {
  if (level < 0 || level > 24) fail(ErrorCode::InvalidArgument, "Grid: dyadic level out of range", level);
  return Grid(1 << level);
}

RVector Grid::points() const {
  RVector x(m_);
  for (int j = 0; j < m_; ++j) x(j) = point(j);
  return x;
}

MatrixFunction::MatrixFunction(int n_, Grid grid_)
    : n(n_), grid(grid_), values(static_cast<std::size_t>(grid_.size()), CMatrix::Zero(n_, n_)) {
  if (n_ < 1) fail(ErrorCode::InvalidArgument, "MatrixFunction: n must be positive", n_);
}

MatrixFunction MatrixFunction::unit(int n, const Grid& grid) {
  return constant(CMatrix::Identity(n, n), grid);
}

MatrixFunction MatrixFunction::constant(const CMatrix& b, const Grid& grid) {
  require_dims(b.rows() == b.cols(), "MatrixFunction::constant: square matrix expected");
  MatrixFunction h(static_cast<int>(b.rows()), grid);
  std::fill(h.values.begin(), h.values.end(), b);
  return h;
}

static void require_same_shape(const MatrixFunction& a, const MatrixFunction& b, const char* what) {
  require_dims(a.n == b.n && a.grid == b.grid && a.values.size() == b.values.size(),
               std::string(what) + ": shape mismatch");
}

MatrixFunction& MatrixFunction::operator+=(const MatrixFunction& o) {
  require_same_shape(*this, o, "operator+");
  for (std::size_t k = 0; k < values.size(); ++k) values[k] += o.values[k];
  return *this;
}

MatrixFunction& MatrixFunction::operator-=(const MatrixFunction& o) {
  require_same_shape(*this, o, "operator-");
  for (std::size_t k = 0; k < values.size(); ++k) values[k] -= o.values[k];
  return *this;
}

MatrixFunction& MatrixFunction::operator*=(Complex s) {
  for (auto& v : values) v *= s;
  return *this;
}

MatrixFunction operator+(MatrixFunction a, const MatrixFunction& b) { return a += b; }
MatrixFunction operator-(MatrixFunction a, const MatrixFunction& b) { return a -= b; }
MatrixFunction operator*(Complex s, MatrixFunction a) { return a *= s; }

MatrixFunction tensor_embed(const CMatrix& b, const GridFunction& f, const Grid& grid) {
  require_dims(f.size() == grid.size(), "tensor_embed: function length " + std::to_string(f.size()) +
                                            " does not match grid size " + std::to_string(grid.size()));
  require_dims(b.rows() == b.cols(), "tensor_embed: square matrix expected");
  MatrixFunction h(static_cast<int>(b.rows()), grid);
  for (int k = 0; k < grid.size(); ++k) h.values[k] = f(k) * b;
  return h;
}

GridFunction corner_extract(const MatrixFunction& h, int i, int j) {
  if (i < 0 || j < 0 || i >= h.n || j >= h.n) {
    fail(ErrorCode::InvalidArgument, "corner_extract: index out of range");
  }
  GridFunction f(h.grid.size());
  for (int k = 0; k < h.grid.size(); ++k) f(k) = h.values[k](i, j);
  return f;
}

double sup_norm(const MatrixFunction& h) {
  double s = 0.0;
  for (const auto& v : h.values) s = std::max(s, op_norm(v));
  return s;
}

MatrixFunction multiply(const MatrixFunction& a, const MatrixFunction& b) {
  require_same_shape(a, b, "multiply");
  MatrixFunction out(a.n, a.grid);
  for (std::size_t k = 0; k < a.values.size(); ++k) out.values[k] = a.values[k] * b.values[k];
  return out;
}

MatrixFunction adjoint(const MatrixFunction& a) {
  MatrixFunction out(a.n, a.grid);
  for (std::size_t k = 0; k < a.values.size(); ++k) out.values[k] = a.values[k].adjoint();
  return out;
}

bool is_pointwise_psd(const MatrixFunction& h, double tol) {
  for (const auto& v : h.values) {
    if ((v - v.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    if (lambda_min(HermitianMatrix::symmetrized(v)) < -tol) return false;
  }
  return true;
}

}  // namespace cpapprox
