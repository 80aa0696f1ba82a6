/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "cpapprox/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cpapprox/error.hpp"

namespace cpapprox {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

CMatrix random_gaussian(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      a(i, j) = Complex(re, im);
    }
  return a;
}

CMatrix random_unitary(Rng& rng, int n) {
  const CMatrix z = random_gaussian(rng, n, n);
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    const double a = std::abs(r(i, i));
    if (a > 0.0) q.col(i) *= r(i, i) / a;
  }
  return q;
}

HermitianMatrix random_psd(Rng& rng, int n, double lo, double hi) {
  const CMatrix u = random_unitary(rng, n);
  RVector d(n);
  for (int i = 0; i < n; ++i) d(i) = uniform(rng, lo, hi);
  return HermitianMatrix::symmetrized(u * d.cast<Complex>().asDiagonal() * u.adjoint());
}

static RVector unit_mean_spectrum(Rng& rng, int n, double lo, double hi) {
  if (!(lo <= 1.0 && 1.0 <= hi)) fail(ErrorCode::InvalidArgument, "unit-mean spectrum needs lo <= 1 <= hi");
  RVector d(n);
  if (n == 1) {
    d(0) = 1.0;
    return d;
  }
  for (;;) {
    double sum = 0.0;
    for (int i = 0; i + 1 < n; ++i) sum += d(i) = uniform(rng, lo, hi);
    d(n - 1) = n - sum;
    if (d(n - 1) >= lo && d(n - 1) <= hi) return d;
  }
}

HermitianMatrix random_unit_trace_density(Rng& rng, int n, double lo, double hi) {
  const RVector d = unit_mean_spectrum(rng, n, lo, hi);
  const CMatrix u = random_unitary(rng, n);
  return HermitianMatrix::symmetrized(u * d.cast<Complex>().asDiagonal() * u.adjoint());
}

CMatrix random_contraction(Rng& rng, int n) {
  CMatrix a = random_gaussian(rng, n, n);
  return a / std::max(1.0, op_norm(a));
}

State random_piecewise_state(Rng& rng, int n, const Grid& grid, int pieces, double lo, double hi, bool diagonal) {
  const int m = grid.size();
  pieces = std::clamp(pieces, 1, m);
  std::vector<int> cuts;
  {
    std::vector<int> candidates(m - 1);
    for (int i = 0; i < m - 1; ++i) candidates[i] = i + 1;
    std::shuffle(candidates.begin(), candidates.end(), rng);
    cuts.assign(candidates.begin(), candidates.begin() + (pieces - 1));
    std::sort(cuts.begin(), cuts.end());
  }
  cuts.push_back(m);
  std::vector<CMatrix> g(m);
  int start = 0;
  for (int cut : cuts) {
    CMatrix value;
    if (diagonal) {
      value = unit_mean_spectrum(rng, n, lo, hi).cast<Complex>().asDiagonal();
    } else {
      value = random_unit_trace_density(rng, n, lo, hi).matrix();
    }
    for (int j = start; j < cut; ++j) g[j] = value;
    start = cut;
  }
  RVector mu(m);
  for (int j = 0; j < m; ++j) mu(j) = uniform(rng, 0.5, 1.5);
  return make_state(grid, std::move(mu), std::move(g));
}

State demo_state() {
  const Grid grid(128);
  const int m = grid.size();
  std::vector<CMatrix> g(m, CMatrix::Zero(2, 2));
  for (int j = 0; j < m; ++j) {
    const int segment = j / 16;
    const double t = (segment + 0.5) / 8.0;
    const double c = 0.5 * std::cos(2.0 * std::numbers::pi * t);
    const double s = 0.3 * std::sin(2.0 * std::numbers::pi * t);
    g[j](0, 0) = 1.0 + c;
    g[j](1, 1) = 1.0 - c;
    g[j](0, 1) = Complex(s, 0.1);
    g[j](1, 0) = Complex(s, -0.1);
  }
  return make_state(grid, RVector::Constant(m, 1.0 / m), std::move(g));
}

MatrixFunction random_matrix_function(Rng& rng, int n, const Grid& grid) {
  MatrixFunction h(n, grid);
  for (auto& v : h.values) v = random_gaussian(rng, n, n);
  const double s = sup_norm(h);
  if (s > 0.0) h *= Complex(1.0 / s, 0.0);
  return h;
}

GridMap random_cp_map(Rng& rng, int n, const Grid& grid, double fill) {
  GridMap s(n, grid);
  const int m = grid.size();
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j) {
      if (uniform(rng, 0.0, 1.0) >= fill) continue;
      const int kraus = 1 + static_cast<int>(uniform(rng, 0.0, 3.0));
      CMatrix kmat = CMatrix::Zero(n * n, n * n);
      for (int r = 0; r < kraus; ++r) kmat += congruence_matrix(random_gaussian(rng, n, n) / std::sqrt(2.0 * n));
      s.set_component(k, j, kmat);
    }
  return s;
}

GridFunction function_preset(const std::string& name, const Grid& grid) {
  using std::numbers::pi;
  if (name == "constant" || name == "one") return sample(grid, [](double) { return 1.0; });
  if (name == "linear") return sample(grid, [](double x) { return x; });
  if (name == "quadratic") return sample(grid, [](double x) { return x * x; });
  if (name == "cosine") return sample(grid, [](double x) { return 0.5 * (1.0 + std::cos(2.0 * pi * x)); });
  if (name.rfind("chebyshev", 0) == 0) {
    const std::string digits = name.substr(9);
    int degree = 0;
    try {
      degree = std::stoi(digits);
    } catch (const std::exception&) {
      fail(ErrorCode::Config, "unknown function preset '" + name + "'");
    }
    if (degree < 0) fail(ErrorCode::Config, "chebyshev degree must be nonnegative", degree);
    return sample(grid, [degree](double x) { return 0.5 * (1.0 + std::cos(degree * std::acos(2.0 * x - 1.0))); });
  }
  fail(ErrorCode::Config, "unknown function preset '" + name + "'");
}

std::vector<GridFunction> function_presets(const std::vector<std::string>& names, const Grid& grid) {
  std::vector<GridFunction> out;
  out.reserve(names.size());
  for (const auto& name : names) out.push_back(function_preset(name, grid));
  return out;
}

}  // namespace cpapprox
