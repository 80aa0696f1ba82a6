/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

// Seeded generators for matrices, states, maps and named test functions.
// Everything here is deterministic given the Rng seed.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cpapprox/blockmap.hpp"
#include "cpapprox/states.hpp"

namespace cpapprox {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
CMatrix random_gaussian(Rng& rng, int rows, int cols);
CMatrix random_unitary(Rng& rng, int n);
// U diag(lambda) U* with lambda uniform in [lo, hi].
HermitianMatrix random_psd(Rng& rng, int n, double lo, double hi);
// Spectrum inside [lo, hi] with mean exactly 1, so tau(g) = 1.
HermitianMatrix random_unit_trace_density(Rng& rng, int n, double lo, double hi);
CMatrix random_contraction(Rng& rng, int n);

// Density piecewise constant on `pieces` random segments, each value drawn by
// random_unit_trace_density; mu uniform in [0.5, 1.5] then normalized.
// `diagonal` restricts densities to diagonal matrices.
State random_piecewise_state(Rng& rng, int n, const Grid& grid, int pieces, double lo, double hi,
                             bool diagonal = false);

// Fixed GNS-faithful state on M_2 (x) C^128: eight segments of smoothly
// varying densities, uniform mu.
State demo_state();

// Random element with sup_norm 1 (complex, not self-adjoint).
MatrixFunction random_matrix_function(Rng& rng, int n, const Grid& grid);

// sum_r K_r x K_r* for random Kraus operators on random (k, j) pairs.
GridMap random_cp_map(Rng& rng, int n, const Grid& grid, double fill);

// Named scalar test functions on [0,1]: "constant", "linear", "quadratic",
// "cosine" ((1 + cos 2 pi x)/2), "chebyshevK" ((1 + T_K(2x - 1))/2).
GridFunction function_preset(const std::string& name, const Grid& grid);
std::vector<GridFunction> function_presets(const std::vector<std::string>& names, const Grid& grid);

}  // namespace cpapprox
