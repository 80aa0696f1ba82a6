/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

// States on M_n (x) C^m in density form phi(h) = sum_j mu_j tau(g_j h_j),
// the conditional expectation onto M_n, and the alternating-pattern state on
// M_2 (x) C^m that kills the off-diagonal corner.

#include <string>
#include <vector>

#include "cpapprox/blockmap.hpp"
#include "cpapprox/gridalg.hpp"

namespace cpapprox {

class State {
 public:
  int n() const noexcept { return n_; }
  const Grid& grid() const noexcept { return grid_; }
  const RVector& mu() const noexcept { return mu_; }
  const std::vector<CMatrix>& g() const noexcept { return g_; }
  // Records any rescaling applied by make_state.
  const std::string& provenance() const noexcept { return provenance_; }

 private:
  friend State make_state(const Grid& grid, RVector mu, std::vector<CMatrix> g);
  State(int n, Grid grid) : n_(n), grid_(grid) {}

  int n_;
  Grid grid_;
  RVector mu_;
  std::vector<CMatrix> g_;
  std::string provenance_;
};

// Normalizes mu to a probability vector and rescales g so that
// sum_j mu_j tau(g_j) = 1. Throws NotAState if some g_j with mu_j > 0 is not
// PSD (within kPsdClamp * max(1, |g_j|)).
State make_state(const Grid& grid, RVector mu, std::vector<CMatrix> g);

Complex eval_state(const State& phi, const MatrixFunction& h);

// E(h) = sum_j mu_j h_j
CMatrix cond_exp(const State& phi, const MatrixFunction& h);

bool is_diagonal(const State& phi, double tol = 1e-14);

// min over {j : mu_j > 0} of lambda_min(g_j).
double faithfulness_margin(const State& phi);

// sup over the unit ball of |phi(S(h)) - phi(h)|, computed exactly as the
// sum over input points of the trace norm of the defect density.
double preservation_defect(const GridMap& s, const State& phi);

// h -> phi(h) 1, a UCP map that preserves phi.
GridMap state_projection(const State& phi);

// Subset X of a dyadic grid with exact half-mass in every dyadic interval of
// level <= balance_level.
struct PatternSet {
  int level = 1;
  int balance_level = 0;
  std::vector<bool> member;

  int size() const noexcept { return static_cast<int>(member.size()); }
  std::vector<int> members() const;
};

// X = even 0-based indices. Requires 0 <= L0 < L (a level-L interval is a
// single point and cannot be split in half).
PatternSet balanced_pattern(int level, int balance_level);

// Exhaustive scan of every dyadic interval up to balance_level.
bool pattern_is_balanced(const PatternSet& x);

// n = 2, mu uniform, g_j = diag(2,0) on X and diag(0,2) off X.
State rudin_state(const PatternSet& x);

}  // namespace cpapprox
