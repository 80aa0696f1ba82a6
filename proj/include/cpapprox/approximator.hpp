/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 *
 * Finite-rank, unital, completely positive, state-preserving approximations
 * of the identity on M_n (x) C^m for states with invertible densities.
 *
 * Given phi(h) = sum_j mu_j tau(g_j h_j), a finite family F of scalar test
 * functions and eps > 0, the pipeline
 *
 *   1. splits the grid into consecutive cells B on which every f in F
 *      oscillates by at most eps/8 (partition_domain),
 *   2. clusters the densities with lambda_min >= gamma into range cells of
 *      operator-norm diameter below eps^2 gamma / 64, so that
 *      |a^{1/2} b^{-1/2} - 1| < eps/8 on each cell's convex hull
 *      (partition_range),
 *   3. picks thresholds delta >= gamma > 0 and the designated range cell of
 *      every B (choose_thresholds),
 *   4. intersects the two partitions into Y-cells with indicator weights rho
 *      (build_y_cells), and
 *   5. assembles
 *
 *        T(h) = sum_Y [ E(rho_Y g)^{-1/2} E(rho_Y g^{1/2} h g^{1/2}) E(rho_Y g)^{-1/2} ] (x) rho_Y
 *
 *      where E = id (x) integral d mu (build_T).
 *
 * T is unital because each sandwich of E(rho g) is the identity, preserves
 * phi because the rho_Y sum to one, and is CP as a sum of congruences.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cpapprox/blockmap.hpp"
#include "cpapprox/states.hpp"

namespace cpapprox {

struct DomainPartition {
  std::vector<IndexRange> cells;
  double osc_bound = 0.0;
};

// Greedy left-to-right maximal cells on which every f oscillates by <= bound.
DomainPartition partition_domain(const std::vector<GridFunction>& funcs, double bound, int m);

// (eps s / (8 gnorm))^2: |a - b| below this forces
// |a^{-1/2} - b^{-1/2}| <= eps / (8 gnorm) when both spectra are >= s.
double modulus_inverse_root(double s, double eps, double gnorm);

struct RangeCells {
  double gamma = 0.0;
  double eta = 0.0;                       // diameter bound actually used
  std::vector<std::vector<int>> cells;    // grid indices
  std::vector<double> diameters;
  std::vector<bool> above_split;          // every member has lambda_min >= split level
};

struct RangeOptions {
  double eta_scale = 1.0;                 // eta = eta_scale * eps^2 gamma / 64
  std::optional<double> split_level;      // cells never straddle this lambda_min level
  int hull_samples = 100;
  std::uint64_t seed = 0x5eed;
};

// Clusters {j : mu_j > 0, lambda_min(g_j) >= gamma}. Throws RangeCellTooCoarse
// if the sampled convex-hull check fails.
RangeCells partition_range(const State& phi, double gamma, double eps, const RangeOptions& opts = {});

struct Thresholds {
  double delta = 0.0;
  double gamma = 0.0;
  double r = 0.0;
  double gnorm = 0.0;
  std::vector<int> designated;  // range cell index i_B per domain cell
  std::vector<int> bad_points;  // mu_j > 0 and lambda_min(g_j) < gamma
};

// delta is the largest value of the ladder gnorm / 2^k such that every domain
// cell has positive mass on {lambda_min(g) >= delta}; gamma = min(delta,
// margin) when the margin is positive, which leaves the bad set empty.
// With `range` (built from gamma with split_level = delta) the designated
// range cell of each domain cell (maximal mass, ties to the lowest index) and
// r are filled in as well. Throws NotGridFaithful when no ladder value works.
Thresholds choose_thresholds(const State& phi, const DomainPartition& part, double eps,
                             const RangeCells* range = nullptr);

struct YCell {
  int domain_cell = 0;
  bool designated = false;
  std::vector<int> members;
  RVector rho;        // weights on the whole grid
  double mass = 0.0;  // sum_j mu_j rho(j)
};

struct YCells {
  std::vector<YCell> cells;
};

struct YCellOptions {
  bool smoothed_rho = false;
  double smoothing_weight = 0.5;  // tent mixing with the two neighbours
};

YCells build_y_cells(const State& phi, const DomainPartition& part, const RangeCells& range,
                     const Thresholds& thresholds, const YCellOptions& opts = {});

struct ApproximatorDiagnostics {
  double eps = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  double r = 0.0;
  double gnorm = 0.0;
  double eta = 0.0;
  std::size_t domain_cells = 0;
  std::size_t range_cells = 0;
  std::size_t cell_count = 0;
  std::size_t rank_bound = 0;
  std::size_t bad_points = 0;
  int eta_halvings = 0;
  std::vector<double> spectral_floors;      // lambda_min E(rho_Y g) per Y-cell
  std::vector<double> floor_requirements;   // delta r / 2 on designated cells, gamma mass / 2 elsewhere
  std::vector<double> sandwich_deviations;
  std::vector<double> sandwich_bounds;  // (eps/4) mass^{-1/2}
  double probe_defect = 0.0;            // F (x) probes
  double matrix_defect = 0.0;           // probes (x) 1
};

struct ApproximatorOptions {
  YCellOptions y_cells;
  std::optional<double> gamma_override;  // forces a nonempty bad set when above the margin
  int random_unitary_probes = 20;
  std::uint64_t seed = 0x5eed;
  int max_eta_halvings = 20;
};

struct Approximation {
  GridMap map;
  ApproximatorDiagnostics diagnostics;
  YCells y_cells;
};

Approximation build_T(const State& phi, const std::vector<GridFunction>& funcs, double eps,
                      const ApproximatorOptions& opts = {});

// Unit-norm probes used by build_T: all matrix units plus `count` random unitaries.
std::vector<CMatrix> probe_matrices(int n, int count, std::uint64_t seed);

}  // namespace cpapprox
