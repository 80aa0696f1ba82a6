/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

// Certified evaluation of the argument showing that a block-form, UCP map
// preserving the alternating-pattern state on M_2 (x) C^m, whose diagonal
// corners have ranges that are flat at the pattern's balance scale, has a
// negligible off-diagonal corner S_12.
//
// For a test function 0 <= f <= 1, a base point theta and eps, the chain is
//
//   |S_12(g)|^2 <= T_i(S_ii(g)) + eps                 g in {f, gamma f, (1 - gamma) f}
//   phi_I(T_1 S_11((1 - gamma) f)) <= eps,  phi_I(T_2 S_22(gamma f)) <= eps
//   avg_I |S_12 f|^2 <= (sqrt(2 eps) + sqrt(2 eps))^2 = 8 eps
//
// where T_1, T_2 average against the pattern X and its complement on the
// interval of a cover containing theta, gamma = 1_X and phi_I is the mean
// over a small interval I around theta. Every intermediate quantity is
// evaluated and recorded.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpapprox/blockmap.hpp"
#include "cpapprox/reformulator.hpp"
#include "cpapprox/states.hpp"

namespace cpapprox {

struct CoverSpec {
  int level = 0;   // dyadic level of the underlying cells
  int collar = 0;  // 1: cells extended by one point on each side, 0: disjoint cells
  int theta = 0;
  std::vector<IndexRange> intervals;  // intervals[0] contains theta
  std::vector<int> samples;           // samples[i] lies only in intervals[i]; samples[0] unused (-1)
  IndexRange j_interval;              // theta in J, J inside intervals[0], J misses every other interval
  std::vector<RVector> rho;           // partition of unity, support(rho[i]) inside intervals[i]
  double oscillation = 0.0;           // largest oscillation ratio over the intervals
};

// Orthonormal basis (Euclidean, unweighted) of the span of the ranges of the
// given m x m maps, from a Gaussian sketch.
struct RangeBasis {
  CMatrix q;                // m x dim
  int dim = 0;
  bool exceeds = false;     // sketch rank went above max_dim; q is then empty
  double residual = 0.0;    // |A - q q* A|_max relative to |A|_max
};

RangeBasis range_basis(const std::vector<const CMatrix*>& maps, int max_dim, std::uint64_t seed);

// sqrt(m) max_{x, y in I} |q_x - q_y|: bounds |f(x) - f(y)| / |f|_sup for
// every f in the span, since the coefficient vector of f has Euclidean norm
// at most sqrt(m) |f|_sup.
double span_oscillation(const RangeBasis& basis, IndexRange interval);

// max over f of osc_I(f) / |f|_sup; zero functions are skipped.
double family_oscillation(const std::vector<GridFunction>& funcs, IndexRange interval);

// Coarsest dyadic level (with one-point collars when they fit, disjoint cells
// otherwise) on which every interval has oscillation ratio below eps. Throws
// Cover if none exists, which needs eps <= 0 on a dyadic grid.
CoverSpec build_cover(const std::vector<GridFunction>& ranges, const Grid& grid, int theta, double eps);
CoverSpec build_cover(const RangeBasis& basis, const Grid& grid, int theta, double eps);
CoverSpec build_cover(const std::function<double(IndexRange)>& ratio, const Grid& grid, int theta, double eps);

// T(f) = sum_{i >= 2} f(t_i) rho_i + (sum_{j in Y} f rho_1 / sum_{j in Y} rho_1) rho_1
// with Y = X for T_1 and Y = X^c for T_2.
struct AveragingMap {
  std::vector<RVector> rho;
  std::vector<int> samples;
  RVector weights;  // normalized rho_1 restricted to Y
  double y_mass = 0.0;
  GridFunction apply(const GridFunction& f) const;
};

// Throws PatternScale when rho_1 gives zero mass to X or to X^c.
std::pair<AveragingMap, AveragingMap> build_averaging_pair(const CoverSpec& cover, const PatternSet& x);

struct ChainStep {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct Certificate {
  double eps = 0.0;
  int theta = 0;
  int cover_level = 0;
  int collar = 0;
  IndexRange averaging;
  std::vector<ChainStep> steps;
  double retention = 0.0;      // max |S_12 f|
  double final_average = 0.0;  // mean over I of |S_12 f|^2
  double final_bound = 0.0;    // 8 eps
  double grid_slack = 0.0;     // oscillation of |S_12 f|^2 over theta's balance-scale cell
  bool pass = false;
};

struct ChainOptions {
  double tol = 1e-7;
  std::uint64_t seed = 0x5eed;
};

struct ChainPreconditions {
  UcpReport ucp;
  double preservation_defect = 0.0;
  int range_dim = 0;
  double range_oscillation = 0.0;
  double range_residual = 0.0;
};

// Checks the hypotheses once (in the order UCP, phi-preservation,
// RangeSmoothness) and then evaluates certificates for any (f, theta).
// Construction throws Precondition with the failing hypothesis as tag.
class ChainVerifier {
 public:
  ChainVerifier(BlockFormMap s, const State& phi, const PatternSet& x, double eps, ChainOptions opts = {});

  const ChainPreconditions& preconditions() const noexcept { return pre_; }
  const RangeBasis& range() const noexcept { return basis_; }

  // Requires 0 <= f <= 1.
  Certificate verify(const GridFunction& f, int theta) const;

 private:
  BlockFormMap s_;
  PatternSet x_;
  double eps_;
  ChainOptions opts_;
  RangeBasis basis_;
  ChainPreconditions pre_;
  std::map<std::pair<int, int>, double> oscillation_;  // span_oscillation per [begin, end)
};

Certificate verify_chain(const BlockFormMap& s, const State& phi, const PatternSet& x, const GridFunction& f,
                         int theta, double eps, const ChainOptions& opts = {});

// S_lambda = (1 - lambda) D + lambda M on dyadic cells of level smooth_level:
// D averages corner ii against the weights mu_j g_j(i, i) and kills the
// off-diagonal corners, M averages every corner uniformly.
GridMap expectation_family(const State& phi, int smooth_level, double lambda);
BlockFormMap expectation_family_blocks(const State& phi, int smooth_level, double lambda);

enum class CertificateStatus { Pass, Fail, Ineligible };
const char* certificate_status_name(CertificateStatus s) noexcept;

struct TradeoffRow {
  double lambda = 0.0;
  double eps = 0.0;
  double preservation_defect = 0.0;
  double retention = 0.0;        // |S(e_12 (x) f)|
  double identity_defect = 0.0;  // |S(e_12 (x) f) - e_12 (x) f|
  double certified_bound = 0.0;
  std::optional<double> final_average;
  CertificateStatus status = CertificateStatus::Ineligible;
  std::string reason;  // failing hypothesis for ineligible rows
};

// One row per (eps, lambda), eps outermost.
std::vector<TradeoffRow> defect_tradeoff_scan(const State& phi, const PatternSet& x, int smooth_level,
                                              const std::vector<double>& lambdas, const GridFunction& f,
                                              const std::vector<double>& eps, int theta,
                                              const ChainOptions& opts = {});

}  // namespace cpapprox
