/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "cpapprox/approximator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "cpapprox/error.hpp"
#include "cpapprox/sampling.hpp"

namespace cpapprox {

namespace {

constexpr int kLadderSteps = 64;

std::vector<double> point_lambda_min(const State& phi) {
  std::vector<double> out(static_cast<std::size_t>(phi.grid().size()), 0.0);
  for (int j = 0; j < phi.grid().size(); ++j) {
    if (phi.mu()(j) > 0.0) out[j] = lambda_min(HermitianMatrix::symmetrized(phi.g()[j]));
  }
  return out;
}

double hermitian_distance(const CMatrix& a, const CMatrix& b) {
  const CMatrix d = a - b;
  if (d.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const SpectralDecomposition sd = eig_herm(HermitianMatrix::symmetrized(d));
  return std::max(std::abs(sd.eigenvalues(0)), std::abs(sd.eigenvalues(sd.eigenvalues.size() - 1)));
}

}  // namespace

DomainPartition partition_domain(const std::vector<GridFunction>& funcs, double bound, int m) {
  if (funcs.empty()) fail(ErrorCode::InvalidArgument, "partition_domain: function family is empty");
  if (!(bound > 0.0)) fail(ErrorCode::InvalidArgument, "partition_domain: bound must be positive", bound);
  for (const auto& f : funcs) require_dims(f.size() == m, "partition_domain: function length does not match grid");

  DomainPartition part;
  part.osc_bound = bound;
  int start = 0;
  while (start < m) {
    int end = start + 1;
    while (end < m) {
      bool ok = true;
      for (const auto& f : funcs) {
        for (int q = start; q < end && ok; ++q) ok = std::abs(f(end) - f(q)) <= bound;
        if (!ok) break;
      }
      if (!ok) break;
      ++end;
    }
    part.cells.push_back({start, end});
    start = end;
  }
  return part;
}

double modulus_inverse_root(double s, double eps, double gnorm) {
  if (!(s > 0.0)) fail(ErrorCode::InvalidArgument, "modulus_inverse_root: s must be positive", s);
  if (!(gnorm > 0.0)) fail(ErrorCode::InvalidArgument, "modulus_inverse_root: gnorm must be positive", gnorm);
  const double t = eps * s / (8.0 * gnorm);
  return t * t;
}

RangeCells partition_range(const State& phi, double gamma, double eps, const RangeOptions& opts) {
  if (!(gamma > 0.0)) fail(ErrorCode::InvalidArgument, "partition_range: gamma must be positive", gamma);
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "partition_range: eps must be positive", eps);
  const std::vector<double> lmin = point_lambda_min(phi);

  RangeCells out;
  out.gamma = gamma;
  out.eta = opts.eta_scale * eps * eps * gamma / 64.0;

  // Distinct density values per cell; members with identical values share one.
  std::vector<std::vector<int>> distinct;
  for (int j = 0; j < phi.grid().size(); ++j) {
    if (phi.mu()(j) == 0.0 || lmin[j] < gamma) continue;
    const bool upper = opts.split_level ? lmin[j] >= *opts.split_level : true;
    const CMatrix& gj = phi.g()[j];
    int chosen = -1;
    bool duplicate = false;
    double widest = 0.0;
    for (std::size_t c = 0; c < out.cells.size() && chosen < 0; ++c) {
      if (out.above_split[c] != upper) continue;
      bool fits = true;
      bool same = false;
      double far = 0.0;
      for (int rep : distinct[c]) {
        const double d = hermitian_distance(gj, phi.g()[rep]);
        if (d == 0.0) {
          same = true;
          break;
        }
        far = std::max(far, d);
        if (d >= out.eta) {
          fits = false;
          break;
        }
      }
      if (same || fits) {
        chosen = static_cast<int>(c);
        duplicate = same;
        widest = same ? 0.0 : far;
      }
    }
    if (chosen < 0) {
      out.cells.push_back({j});
      out.diameters.push_back(0.0);
      out.above_split.push_back(upper);
      distinct.push_back({j});
      continue;
    }
    out.cells[chosen].push_back(j);
    if (!duplicate) {
      distinct[chosen].push_back(j);
      out.diameters[chosen] = std::max(out.diameters[chosen], widest);
    }
  }

  // Sampled check of |a^{1/2} b^{-1/2} - 1| < eps/8 on the convex hull.
  Rng rng(opts.seed);
  for (std::size_t c = 0; c < out.cells.size(); ++c) {
    const auto& reps = distinct[c];
    if (reps.size() < 2) continue;
    std::uniform_int_distribution<std::size_t> pick(0, reps.size() - 1);
    for (int s = 0; s < opts.hull_samples; ++s) {
      const double t = uniform(rng, 0.0, 1.0);
      const double u = uniform(rng, 0.0, 1.0);
      const CMatrix a = t * phi.g()[reps[pick(rng)]] + (1.0 - t) * phi.g()[reps[pick(rng)]];
      const CMatrix b = u * phi.g()[reps[pick(rng)]] + (1.0 - u) * phi.g()[reps[pick(rng)]];
      const HermitianMatrix bh = HermitianMatrix::symmetrized(b);
      const CMatrix dev = psd_sqrt(HermitianMatrix::symmetrized(a)).matrix() *
                              psd_inv_sqrt(bh, std::max(gamma * (1.0 - 1e-9), lambda_min(bh) * (1.0 - 1e-12))).matrix() -
                          CMatrix::Identity(phi.n(), phi.n());
      const double v = op_norm(dev);
      if (!(v < eps / 8.0)) {
        fail(ErrorCode::RangeCellTooCoarse,
             "partition_range: hull sample violates the eps/8 bound in cell " + std::to_string(c), v);
      }
    }
  }
  return out;
}

Thresholds choose_thresholds(const State& phi, const DomainPartition& part, double eps, const RangeCells* range) {
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "choose_thresholds: eps must be positive", eps);
  const std::vector<double> lmin = point_lambda_min(phi);
  const RVector& mu = phi.mu();

  Thresholds th;
  for (int j = 0; j < phi.grid().size(); ++j)
    if (mu(j) > 0.0) th.gnorm = std::max(th.gnorm, op_norm(phi.g()[j]));

  for (const auto& cell : part.cells) {
    double mass = 0.0;
    for (int j = cell.begin; j < cell.end; ++j) mass += mu(j);
    if (!(mass > 0.0)) {
      fail(ErrorCode::NotGridFaithful, "choose_thresholds: domain cell [" + std::to_string(cell.begin) + ", " +
                                           std::to_string(cell.end) + ") has zero mass");
    }
  }

  bool found = false;
  for (int k = 0; k <= kLadderSteps && !found; ++k) {
    const double delta = std::ldexp(th.gnorm, -k);
    bool ok = delta > 0.0;
    for (const auto& cell : part.cells) {
      if (!ok) break;
      double mass = 0.0;
      for (int j = cell.begin; j < cell.end; ++j)
        if (mu(j) > 0.0 && lmin[j] >= delta) mass += mu(j);
      ok = mass > 0.0;
    }
    if (ok) {
      th.delta = delta;
      found = true;
    }
  }
  if (!found) {
    fail(ErrorCode::NotGridFaithful,
         "choose_thresholds: no ladder value gives every domain cell positive mass on {lambda_min(g) >= delta}",
         faithfulness_margin(phi));
  }

  const double margin = faithfulness_margin(phi);
  if (margin > 0.0) {
    th.gamma = std::min(th.delta, margin);
  } else {
    double smallest = th.delta;
    for (int j = 0; j < phi.grid().size(); ++j)
      if (mu(j) > 0.0 && lmin[j] > 0.0) smallest = std::min(smallest, lmin[j]);
    th.gamma = smallest;
  }
  for (int j = 0; j < phi.grid().size(); ++j)
    if (mu(j) > 0.0 && lmin[j] < th.gamma) th.bad_points.push_back(j);

  if (range == nullptr) return th;

  std::vector<int> cell_of(static_cast<std::size_t>(phi.grid().size()), -1);
  for (std::size_t c = 0; c < range->cells.size(); ++c)
    for (int j : range->cells[c]) cell_of[j] = static_cast<int>(c);

  th.r = std::numeric_limits<double>::infinity();
  for (const auto& cell : part.cells) {
    std::map<int, double> mass_by_cell;
    for (int j = cell.begin; j < cell.end; ++j) {
      const int c = cell_of[j];
      if (c >= 0 && range->above_split[c] && mu(j) > 0.0) mass_by_cell[c] += mu(j);
    }
    int best = -1;
    double best_mass = 0.0;
    for (const auto& [c, mass] : mass_by_cell) {
      if (mass > best_mass) {
        best = c;
        best_mass = mass;
      }
    }
    if (best < 0) {
      fail(ErrorCode::Internal, "choose_thresholds: domain cell without a designated range cell; range cells "
                                "must be built with split_level = delta");
    }
    th.designated.push_back(best);
    th.r = std::min(th.r, best_mass);
  }
  return th;
}

YCells build_y_cells(const State& phi, const DomainPartition& part, const RangeCells& range,
                     const Thresholds& thresholds, const YCellOptions& opts) {
  const int m = phi.grid().size();
  require_dims(thresholds.designated.size() == part.cells.size(), "build_y_cells: thresholds lack designations");
  std::vector<int> cell_of(static_cast<std::size_t>(m), -1);
  for (std::size_t c = 0; c < range.cells.size(); ++c)
    for (int j : range.cells[c]) cell_of[j] = static_cast<int>(c);

  YCells out;
  for (std::size_t b = 0; b < part.cells.size(); ++b) {
    const IndexRange& cell = part.cells[b];
    const int designated = thresholds.designated[b];
    YCell first;
    first.domain_cell = static_cast<int>(b);
    first.designated = true;
    std::map<int, std::vector<int>> others;
    for (int j = cell.begin; j < cell.end; ++j) {
      const int c = cell_of[j];
      // Bad points and zero-mass points join the designated cell.
      if (c < 0 || c == designated || phi.mu()(j) == 0.0) {
        first.members.push_back(j);
      } else {
        others[c].push_back(j);
      }
    }
    if (first.members.empty()) fail(ErrorCode::Internal, "build_y_cells: empty designated Y-cell");
    out.cells.push_back(std::move(first));
    for (auto& [c, members] : others) {
      YCell y;
      y.domain_cell = static_cast<int>(b);
      y.members = std::move(members);
      out.cells.push_back(std::move(y));
    }
  }

  for (auto& y : out.cells) {
    RVector ind = RVector::Zero(m);
    for (int j : y.members) ind(j) = 1.0;
    if (opts.smoothed_rho) {
      const double w = opts.smoothing_weight;
      RVector smooth = RVector::Zero(m);
      for (int k = 0; k < m; ++k) {
        double acc = (1.0 - w) * ind(k);
        double norm = 1.0 - w;
        if (k > 0) {
          acc += 0.5 * w * ind(k - 1);
          norm += 0.5 * w;
        }
        if (k + 1 < m) {
          acc += 0.5 * w * ind(k + 1);
          norm += 0.5 * w;
        }
        smooth(k) = acc / norm;
      }
      y.rho = std::move(smooth);
    } else {
      y.rho = std::move(ind);
    }
    y.mass = phi.mu().dot(y.rho);
  }
  return out;
}

std::vector<CMatrix> probe_matrices(int n, int count, std::uint64_t seed) {
  std::vector<CMatrix> probes;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) probes.push_back(matrix_unit(n, a, b));
  Rng rng(seed);
  for (int i = 0; i < count; ++i) probes.push_back(random_unitary(rng, n));
  return probes;
}

Approximation build_T(const State& phi, const std::vector<GridFunction>& funcs, double eps,
                      const ApproximatorOptions& opts) {
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "build_T: eps must be positive", eps);
  const int n = phi.n();
  const int m = phi.grid().size();
  const RVector& mu = phi.mu();

  const DomainPartition part = partition_domain(funcs, eps / 8.0, m);
  Thresholds th = choose_thresholds(phi, part, eps);
  if (opts.gamma_override) {
    const double g = *opts.gamma_override;
    if (!(g > 0.0) || g > th.delta) {
      fail(ErrorCode::InvalidArgument, "build_T: gamma override must lie in (0, delta]", g);
    }
    th.gamma = g;
  }

  RangeCells range;
  int halvings = 0;
  for (;; ++halvings) {
    RangeOptions ro;
    ro.eta_scale = std::ldexp(1.0, -halvings);
    ro.split_level = th.delta;
    ro.seed = opts.seed;
    try {
      range = partition_range(phi, th.gamma, eps, ro);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RangeCellTooCoarse || halvings >= opts.max_eta_halvings) throw;
    }
  }
  const double gamma = th.gamma;
  th = choose_thresholds(phi, part, eps, &range);
  th.gamma = gamma;
  th.bad_points.clear();
  for (int j = 0; j < m; ++j)
    if (mu(j) > 0.0 && lambda_min(HermitianMatrix::symmetrized(phi.g()[j])) < gamma) th.bad_points.push_back(j);

  YCells ycells = build_y_cells(phi, part, range, th, opts.y_cells);

  ApproximatorDiagnostics diag;
  diag.eps = eps;
  diag.delta = th.delta;
  diag.gamma = th.gamma;
  diag.r = th.r;
  diag.gnorm = th.gnorm;
  diag.eta = range.eta;
  diag.eta_halvings = halvings;
  diag.domain_cells = part.cells.size();
  diag.range_cells = range.cells.size();
  diag.cell_count = ycells.cells.size();
  diag.rank_bound = ycells.cells.size() * static_cast<std::size_t>(n * n);
  diag.bad_points = th.bad_points.size();

  std::vector<double> lmin(static_cast<std::size_t>(m), 0.0);
  std::vector<CMatrix> root(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    if (mu(j) == 0.0) continue;
    const HermitianMatrix gj = HermitianMatrix::symmetrized(phi.g()[j]);
    lmin[j] = lambda_min(gj);
    root[j] = psd_sqrt(gj).matrix();
  }

  GridMap t(n, phi.grid());
  for (const YCell& y : ycells.cells) {
    CMatrix e = CMatrix::Zero(n, n);
    double good_mass = 0.0;
    std::vector<int> support;
    for (int j = 0; j < m; ++j) {
      if (y.rho(j) <= 0.0 || mu(j) == 0.0) continue;
      support.push_back(j);
      e += mu(j) * y.rho(j) * phi.g()[j];
      if (lmin[j] >= gamma) good_mass += mu(j) * y.rho(j);
    }
    const HermitianMatrix eh = HermitianMatrix::symmetrized(e);
    const double floor_required = y.designated ? 0.5 * th.delta * th.r : 0.5 * gamma * good_mass;
    const double floor_value = lambda_min(eh);
    diag.spectral_floors.push_back(floor_value);
    diag.floor_requirements.push_back(floor_required);
    if (floor_value < floor_required * (1.0 - 1e-12)) {
      fail(ErrorCode::SpectralFloorViolation,
           "build_T: E(rho g) has lambda_min " + std::to_string(floor_value) + " below required " +
               std::to_string(floor_required),
           floor_value);
    }
    const CMatrix inv_root = psd_inv_sqrt(eh, floor_value * (1.0 - 1e-12)).matrix();

    double deviation = 0.0;
    const double scale = 1.0 / std::sqrt(good_mass);
    for (int j : support) {
      if (lmin[j] < gamma) continue;
      deviation = std::max(deviation, op_norm(root[j] * inv_root - scale * CMatrix::Identity(n, n)));
    }
    diag.sandwich_deviations.push_back(deviation);
    diag.sandwich_bounds.push_back(0.25 * eps * scale);

    std::vector<int> outputs;
    for (int k = 0; k < m; ++k)
      if (y.rho(k) > 0.0) outputs.push_back(k);
    for (int j : support) {
      const CMatrix kj = (mu(j) * y.rho(j)) * congruence_matrix(inv_root * root[j]);
      for (int k : outputs) t.add_component(k, j, y.rho(k) * kj);
    }
  }
  t.structure = opts.y_cells.smoothed_rho ? "dense" : "cell-block";
  if (!opts.y_cells.smoothed_rho) {
    for (const auto& y : ycells.cells) t.cell_blocks.push_back(y.members);
  }
  t.rank_bound = diag.rank_bound;

  const std::vector<CMatrix> probes = probe_matrices(n, opts.random_unitary_probes, opts.seed);
  diag.probe_defect = defect_probe(t, funcs, probes);
  diag.matrix_defect = defect_probe(t, {GridFunction::Ones(m)}, probes);

  return {std::move(t), std::move(diag), std::move(ycells)};
}

}  // namespace cpapprox
