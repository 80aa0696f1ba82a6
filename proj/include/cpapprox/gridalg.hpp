/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

// M_n (x) C(X) discretized on a uniform midpoint grid over [0,1]: one n x n
// matrix per grid point, with the pointwise *-algebra structure.

#include <optional>
#include <vector>

#include "cpapprox/matcore.hpp"

namespace cpapprox {

// Midpoint grid x_j = (2j+1)/(2m), j = 0..m-1.
class Grid {
 public:
  explicit Grid(int m);
  static Grid dyadic(int level);

  int size() const noexcept { return m_; }
  double point(int j) const noexcept { return (2.0 * j + 1.0) / (2.0 * m_); }
  RVector points() const;
  std::optional<int> dyadic_level() const noexcept { return level_; }

  bool operator==(const Grid& o) const noexcept { return m_ == o.m_; }

 private:
  int m_;
  std::optional<int> level_;
};

using GridFunction = CVector;

// Consecutive grid indices [begin, end).
struct IndexRange {
  int begin = 0;
  int end = 0;
  int size() const noexcept { return end - begin; }
  bool contains(int j) const noexcept { return begin <= j && j < end; }
};

struct MatrixFunction {
  int n = 0;
  Grid grid{1};
  std::vector<CMatrix> values;

  MatrixFunction() = default;
  MatrixFunction(int n_, Grid grid_);  // zero element

  static MatrixFunction unit(int n, const Grid& grid);
  static MatrixFunction constant(const CMatrix& b, const Grid& grid);

  MatrixFunction& operator+=(const MatrixFunction& o);
  MatrixFunction& operator-=(const MatrixFunction& o);
  MatrixFunction& operator*=(Complex s);
};

MatrixFunction operator+(MatrixFunction a, const MatrixFunction& b);
MatrixFunction operator-(MatrixFunction a, const MatrixFunction& b);
MatrixFunction operator*(Complex s, MatrixFunction a);

// values[j] = f(x_j) * b
MatrixFunction tensor_embed(const CMatrix& b, const GridFunction& f, const Grid& grid);

// k -> values[k](i, j), 0-based indices.
GridFunction corner_extract(const MatrixFunction& h, int i, int j);

double sup_norm(const MatrixFunction& h);

MatrixFunction multiply(const MatrixFunction& a, const MatrixFunction& b);
MatrixFunction adjoint(const MatrixFunction& a);

bool is_pointwise_psd(const MatrixFunction& h, double tol);

// Scalar function on the grid from a real-valued callable of x.
template <class F>
GridFunction sample(const Grid& grid, F&& f) {
  GridFunction out(grid.size());
  for (int j = 0; j < grid.size(); ++j) out(j) = Complex(f(grid.point(j)), 0.0);
  return out;
}

}  // namespace cpapprox
