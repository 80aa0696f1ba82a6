/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "cpapprox/approximator.hpp"
#include "cpapprox/error.hpp"
#include "cpapprox/sampling.hpp"

using namespace cpapprox;

namespace {

double oscillation(const GridFunction& f, IndexRange r) {
  double worst = 0.0;
  for (int a = r.begin; a < r.end; ++a)
    for (int b = r.begin; b < r.end; ++b) worst = std::max(worst, std::abs(f(a) - f(b)));
  return worst;
}

// Smooth densities, except a few light points where the spectrum nearly
// touches 0. The bad set has to be light for absorption into Y_1 to stay
// within the eps budget.
State state_with_dips() {
  const Grid grid(64);
  RVector mu = RVector::Ones(64);
  std::vector<CMatrix> g(64);
  for (int j = 0; j < 64; ++j) {
    const double s = 0.5 * std::sin(6.0 * grid.point(j));
    g[j] = CMatrix::Zero(2, 2);
    g[j](0, 0) = 1.0 + s;
    g[j](1, 1) = 1.0 - s;
    g[j](0, 1) = g[j](1, 0) = 0.1;
  }
  for (int j : {5, 6, 40}) {
    mu(j) = 1e-6;
    g[j] = CMatrix::Zero(2, 2);
    g[j](0, 0) = 1.99;
    g[j](1, 1) = 0.01;
  }
  return make_state(grid, mu, g);
}

void check_guarantees(const State& phi, const std::vector<GridFunction>& funcs, double eps, const Approximation& a) {
  const UcpReport ucp = verify_ucp(a.map, 1e-9);
  CHECK(ucp.is_ucp);
  CHECK(preservation_defect(a.map, phi) <= 1e-9);
  const auto& d = a.diagnostics;
  CHECK(d.probe_defect <= eps);
  CHECK(d.matrix_defect <= 7.0 * eps / 8.0);
  CHECK(numerical_rank(a.map, 1e-9) <= d.rank_bound);
  REQUIRE(d.spectral_floors.size() == d.floor_requirements.size());
  for (std::size_t i = 0; i < d.spectral_floors.size(); ++i) CHECK(d.spectral_floors[i] >= d.floor_requirements[i] * (1 - 1e-12));
  REQUIRE(d.sandwich_deviations.size() == d.sandwich_bounds.size());
  for (std::size_t i = 0; i < d.sandwich_deviations.size(); ++i) CHECK(d.sandwich_deviations[i] <= d.sandwich_bounds[i]);
  // An independent probe: random unitaries against every function.
  Rng rng(99);
  for (int t = 0; t < 5; ++t) {
    const CMatrix u = random_unitary(rng, phi.n());
    for (const auto& f : funcs) {
      const MatrixFunction h = tensor_embed(u, f, phi.grid());
      CHECK(sup_norm(apply(a.map, h) - h) <= eps);
    }
  }
}

}  // namespace

TEST_CASE("domain partition: small oscillation and maximal cells") {
  const Grid grid(200);
  const auto funcs = function_presets({"linear", "cosine", "chebyshev5"}, grid);
  for (double bound : {0.3, 0.05, 0.01}) {
    const DomainPartition p = partition_domain(funcs, bound, 200);
    CHECK(p.cells.front().begin == 0);
    CHECK(p.cells.back().end == 200);
    for (std::size_t i = 0; i < p.cells.size(); ++i) {
      if (i > 0) CHECK(p.cells[i].begin == p.cells[i - 1].end);
      for (const auto& f : funcs) CHECK(oscillation(f, p.cells[i]) <= bound);
      if (i + 1 < p.cells.size()) {
        const IndexRange grown{p.cells[i].begin, p.cells[i].end + 1};
        double worst = 0.0;
        for (const auto& f : funcs) worst = std::max(worst, oscillation(f, grown));
        CHECK(worst > bound);
      }
    }
  }
  CHECK_THROWS_AS(partition_domain({}, 0.1, 10), Error);
}

TEST_CASE("modulus of the inverse square root") {
  CHECK(modulus_inverse_root(0.5, 0.1, 2.0) == doctest::Approx(std::pow(0.1 * 0.5 / 16.0, 2)));
  Rng rng(51);
  const double s = 0.1, big = 2.0, eps = 0.2;
  const double f = modulus_inverse_root(s, eps, big);
  int tested = 0;
  while (tested < 300) {
    const HermitianMatrix a = random_psd(rng, 2, s, big);
    const CMatrix h = HermitianMatrix::symmetrized(random_gaussian(rng, 2, 2)).matrix();
    const HermitianMatrix b = HermitianMatrix::symmetrized(a.matrix() + (f * uniform(rng, 0, 1) / op_norm(h)) * h);
    const RVector ev = eig_herm(b).eigenvalues;
    if (ev(0) < s || ev(1) > big) continue;
    ++tested;
    CHECK(op_norm(psd_inv_sqrt(a, s / 2).matrix() - psd_inv_sqrt(b, s / 2).matrix()) <= eps / (8 * big));
  }
}

TEST_CASE("build_T on random faithful states") {
  Rng rng(52);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 2 + trial % 2;
    const State phi = random_piecewise_state(rng, n, Grid(64), 6, 0.1, 2.0);
    const auto funcs = function_presets({"constant", "linear", "quadratic", "cosine"}, phi.grid());
    for (double eps : {0.4, 0.1}) check_guarantees(phi, funcs, eps, build_T(phi, funcs, eps));
  }
}

TEST_CASE("rank bound agrees with a dense SVD on a small grid") {
  Rng rng(53);
  const State phi = random_piecewise_state(rng, 2, Grid(24), 3, 0.1, 2.0);
  const auto funcs = function_presets({"linear"}, phi.grid());
  const Approximation a = build_T(phi, funcs, 0.3);
  Eigen::JacobiSVD<CMatrix> svd(assemble(a.map));
  std::size_t dense = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) dense += svd.singularValues()(i) > 1e-9;
  CHECK(dense == numerical_rank(a.map, 1e-9));
  CHECK(dense <= a.diagnostics.rank_bound);
  CHECK(a.diagnostics.rank_bound == a.diagnostics.cell_count * 4);
}

TEST_CASE("Y-cells partition the support") {
  Rng rng(54);
  const State phi = random_piecewise_state(rng, 2, Grid(48), 4, 0.1, 2.0);
  const Approximation a = build_T(phi, function_presets({"cosine"}, phi.grid()), 0.2);
  std::vector<int> seen(48, 0);
  double mass = 0.0;
  for (const auto& y : a.y_cells.cells) {
    for (int j : y.members) ++seen[j];
    mass += y.mass;
  }
  for (int j = 0; j < 48; ++j) CHECK(seen[j] == 1);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bad points are absorbed") {
  const State phi = state_with_dips();
  const auto funcs = function_presets({"constant", "linear"}, phi.grid());
  ApproximatorOptions opts;
  opts.gamma_override = 0.05;
  const Approximation a = build_T(phi, funcs, 0.4, opts);
  CHECK(a.diagnostics.bad_points == 3);
  check_guarantees(phi, funcs, 0.4, a);
  check_guarantees(phi, funcs, 0.4, build_T(phi, funcs, 0.4));
}

TEST_CASE("smoothed partition of unity keeps the guarantees") {
  Rng rng(55);
  const State phi = random_piecewise_state(rng, 2, Grid(64), 4, 0.1, 2.0);
  const auto funcs = function_presets({"constant", "linear"}, phi.grid());
  ApproximatorOptions opts;
  opts.y_cells.smoothed_rho = true;
  const Approximation a = build_T(phi, funcs, 0.4, opts);
  CHECK(verify_ucp(a.map, 1e-9).is_ucp);
  CHECK(preservation_defect(a.map, phi) <= 1e-9);
}

TEST_CASE("states without a spectral floor are refused") {
  const State phi = rudin_state(balanced_pattern(6, 3));
  try {
    build_T(phi, function_presets({"constant"}, phi.grid()), 0.4);
    FAIL("expected NotGridFaithful");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotGridFaithful);
  }
  Rng rng(56);
  const State psi = random_piecewise_state(rng, 2, Grid(16), 2, 0.1, 2.0);
  CHECK_THROWS_AS(build_T(psi, function_presets({"constant"}, psi.grid()), 0.0), Error);
  ApproximatorOptions opts;
  opts.gamma_override = 10.0;
  CHECK_THROWS_AS(build_T(psi, function_presets({"constant"}, psi.grid()), 0.4, opts), Error);
}

TEST_CASE("deterministic given the seed") {
  const State phi = demo_state();
  const auto funcs = function_presets({"linear"}, phi.grid());
  const Approximation a = build_T(phi, funcs, 0.2);
  const Approximation b = build_T(phi, funcs, 0.2);
  CHECK(a.diagnostics.probe_defect == b.diagnostics.probe_defect);
  CHECK(a.map.components().size() == b.map.components().size());
}
