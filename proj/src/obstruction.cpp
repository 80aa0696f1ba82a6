/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "cpapprox/obstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cpapprox/error.hpp"
#include "cpapprox/sampling.hpp"

namespace cpapprox {

namespace {

constexpr double kSketchRankCutoff = 1e-10;
constexpr double kSketchResidual = 1e-8;

int grid_level(const Grid& grid, const char* where) {
  if (!grid.dyadic_level()) fail(ErrorCode::InvalidArgument, std::string(where) + ": grid size must be a power of two");
  return *grid.dyadic_level();
}

IndexRange dyadic_cell(int m, int level, int j) {
  const int width = m >> level;
  const int begin = (j / width) * width;
  return {begin, begin + width};
}

double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double mean_over(const GridFunction& h, IndexRange range) {
  double acc = 0.0;
  for (int j = range.begin; j < range.end; ++j) acc += h(j).real();
  return acc / range.size();
}

}  // namespace

RangeBasis range_basis(const std::vector<const CMatrix*>& maps, int max_dim, std::uint64_t seed) {
  if (maps.empty()) fail(ErrorCode::InvalidArgument, "range_basis: no maps given");
  if (max_dim < 0) fail(ErrorCode::InvalidArgument, "range_basis: max_dim must be nonnegative", max_dim);
  const auto m = maps.front()->rows();
  for (const CMatrix* a : maps) require_dims(a->rows() == m && a->cols() == m, "range_basis: m x m maps expected");

  const int k = static_cast<int>(std::min<Eigen::Index>(m, max_dim + 8));
  Rng rng(seed);
  CMatrix y = CMatrix::Zero(m, k);
  double scale = 0.0;
  for (const CMatrix* a : maps) {
    y.noalias() += *a * random_gaussian(rng, static_cast<int>(m), k);
    scale = std::max(scale, max_abs(*a));
  }

  RangeBasis out;
  if (scale == 0.0) {
    out.q = CMatrix::Zero(m, 0);
    return out;
  }
  // Thin QR first so that the SVD only sees a k x k factor.
  const Eigen::HouseholderQR<CMatrix> qr(y);
  const CMatrix thin_q = qr.householderQ() * CMatrix::Identity(m, k);
  const CMatrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<CMatrix> svd(r, Eigen::ComputeFullU);
  const RVector& sv = svd.singularValues();
  int rank = 0;
  while (rank < sv.size() && sv(rank) > kSketchRankCutoff * sv(0)) ++rank;
  out.dim = rank;
  if (rank > max_dim) {
    out.exceeds = true;
    return out;
  }
  out.q = thin_q * svd.matrixU().leftCols(rank);
  for (const CMatrix* a : maps) {
    const CMatrix left = *a - out.q * (out.q.adjoint() * *a);
    out.residual = std::max(out.residual, max_abs(left) / scale);
  }
  return out;
}

double span_oscillation(const RangeBasis& basis, IndexRange interval) {
  if (basis.dim == 0 || interval.size() < 2) return 0.0;
  const double m = static_cast<double>(basis.q.rows());
  double worst = 0.0;
  for (int x = interval.begin; x + 1 < interval.end; ++x) {
    const auto rest = basis.q.middleRows(x + 1, interval.end - x - 1);
    worst = std::max(worst, (rest.rowwise() - basis.q.row(x)).rowwise().squaredNorm().maxCoeff());
  }
  return std::sqrt(m * worst);
}

double family_oscillation(const std::vector<GridFunction>& funcs, IndexRange interval) {
  double worst = 0.0;
  for (const auto& f : funcs) {
    const double norm = f.cwiseAbs().maxCoeff();
    if (norm == 0.0) continue;
    double osc = 0.0;
    for (int x = interval.begin; x < interval.end; ++x)
      for (int y = x + 1; y < interval.end; ++y) osc = std::max(osc, std::abs(f(x) - f(y)));
    worst = std::max(worst, osc / norm);
  }
  return worst;
}

CoverSpec build_cover(const std::function<double(IndexRange)>& ratio, const Grid& grid, int theta, double eps) {
  const int levels = grid_level(grid, "build_cover");
  const int m = grid.size();
  if (theta < 0 || theta >= m) fail(ErrorCode::InvalidArgument, "build_cover: theta out of range", theta);
  if (!(eps > 0.0)) fail(ErrorCode::Cover, "build_cover: eps must be positive", eps);

  for (int level = 0; level <= levels; ++level) {
    const int width = m >> level;
    const int count = 1 << level;
    for (int collar : {1, 0}) {
      if (collar == 1 && count < 2) continue;
      std::vector<IndexRange> cells(count), intervals(count), exclusive(count);
      bool ok = true;
      double osc = 0.0;
      for (int c = 0; c < count && ok; ++c) {
        cells[c] = {c * width, (c + 1) * width};
        intervals[c] = {std::max(0, cells[c].begin - collar), std::min(m, cells[c].end + collar)};
        exclusive[c] = {cells[c].begin + (cells[c].begin > 0 ? collar : 0),
                        cells[c].end - (cells[c].end < m ? collar : 0)};
        ok = exclusive[c].size() > 0;
        if (ok) {
          const double r = ratio(intervals[c]);
          osc = std::max(osc, r);
          ok = r < eps;
        }
      }
      const int home = theta / width;
      if (!ok || !exclusive[home].contains(theta)) continue;

      CoverSpec cover;
      cover.level = level;
      cover.collar = collar;
      cover.theta = theta;
      cover.oscillation = osc;
      cover.j_interval = exclusive[home];
      std::vector<int> order{home};
      for (int c = 0; c < count; ++c)
        if (c != home) order.push_back(c);
      for (int c : order) {
        cover.intervals.push_back(intervals[c]);
        cover.samples.push_back(c == home ? -1 : exclusive[c].begin);
        RVector rho = RVector::Zero(m);
        for (int p = intervals[c].begin; p < intervals[c].end; ++p) {
          if (collar == 0) {
            rho(p) = 1.0;
            continue;
          }
          // Box average of the cell indicator over the neighbours of p.
          int inside = 0;
          int total = 0;
          for (int q = p - 1; q <= p + 1; ++q) {
            if (q < 0 || q >= m) continue;
            ++total;
            inside += cells[c].contains(q) ? 1 : 0;
          }
          rho(p) = static_cast<double>(inside) / total;
        }
        cover.rho.push_back(std::move(rho));
      }
      return cover;
    }
  }
  fail(ErrorCode::Cover, "build_cover: no dyadic cover meets the oscillation bound", eps);
}

CoverSpec build_cover(const std::vector<GridFunction>& ranges, const Grid& grid, int theta, double eps) {
  for (const auto& f : ranges) require_dims(f.size() == grid.size(), "build_cover: function length does not match grid");
  return build_cover([&](IndexRange r) { return family_oscillation(ranges, r); }, grid, theta, eps);
}

CoverSpec build_cover(const RangeBasis& basis, const Grid& grid, int theta, double eps) {
  if (basis.exceeds) fail(ErrorCode::InvalidArgument, "build_cover: range basis is incomplete");
  require_dims(basis.q.rows() == grid.size(), "build_cover: basis length does not match grid");
  return build_cover([&](IndexRange r) { return span_oscillation(basis, r); }, grid, theta, eps);
}

GridFunction AveragingMap::apply(const GridFunction& f) const {
  require_dims(f.size() == weights.size(), "AveragingMap: function length does not match grid");
  GridFunction out = (weights.cast<Complex>().dot(f)) * rho[0].cast<Complex>();
  for (std::size_t i = 1; i < rho.size(); ++i) out += f(samples[i]) * rho[i].cast<Complex>();
  return out;
}

std::pair<AveragingMap, AveragingMap> build_averaging_pair(const CoverSpec& cover, const PatternSet& x) {
  if (cover.rho.empty()) fail(ErrorCode::InvalidArgument, "build_averaging_pair: empty cover");
  const auto m = cover.rho[0].size();
  require_dims(m == x.size(), "build_averaging_pair: pattern does not match the cover's grid");
  AveragingMap t1, t2;
  t1.rho = t2.rho = cover.rho;
  t1.samples = t2.samples = cover.samples;
  t1.weights = t2.weights = RVector::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (x.member[j]) {
      t1.weights(j) = cover.rho[0](j);
    } else {
      t2.weights(j) = cover.rho[0](j);
    }
  }
  t1.y_mass = t1.weights.sum();
  t2.y_mass = t2.weights.sum();
  if (!(t1.y_mass > 0.0) || !(t2.y_mass > 0.0)) {
    fail(ErrorCode::PatternScale, "build_averaging_pair: rho_1 misses X or its complement; the cover is finer "
                                  "than the pattern's balance scale",
         std::min(t1.y_mass, t2.y_mass));
  }
  t1.weights /= t1.y_mass;
  t2.weights /= t2.y_mass;
  return {std::move(t1), std::move(t2)};
}

ChainVerifier::ChainVerifier(BlockFormMap s, const State& phi, const PatternSet& x, double eps, ChainOptions opts)
    : s_(std::move(s)), x_(x), eps_(eps), opts_(opts) {
  if (s_.n() != 2 || phi.n() != 2) fail(ErrorCode::Dimension, "ChainVerifier: maps on M_2 (x) C^m expected");
  require_dims(s_.grid() == phi.grid() && phi.grid().size() == x.size(), "ChainVerifier: shape mismatch");
  if (!(eps > 0.0 && eps <= 1.0)) fail(ErrorCode::InvalidArgument, "ChainVerifier: eps must lie in (0, 1]", eps);
  const int m = phi.grid().size();

  pre_.ucp = verify_ucp(s_, opts_.tol);
  if (!pre_.ucp.is_ucp) {
    const double witness =
        pre_.ucp.unitality_defect > opts_.tol ? pre_.ucp.unitality_defect : pre_.ucp.min_choi_eigenvalue;
    fail(ErrorCode::Precondition, "ChainVerifier: map is not UCP", witness, "UCP");
  }
  pre_.preservation_defect = preservation_defect(s_, phi);
  if (pre_.preservation_defect > opts_.tol) {
    fail(ErrorCode::Precondition, "ChainVerifier: map does not preserve the state", pre_.preservation_defect,
         "phi-preservation");
  }

  // A range with dimension above 2^L0 contains a nonzero function vanishing
  // at one point of every balance-scale cell, whose oscillation on some cell
  // is then at least its norm >= eps |f|.
  const int balance = x.balance_level;
  basis_ = range_basis({&s_.corner(0, 0), &s_.corner(1, 1)}, 1 << balance, opts_.seed);
  pre_.range_dim = basis_.dim;
  if (basis_.exceeds) {
    fail(ErrorCode::Precondition,
         "ChainVerifier: diagonal corner ranges have dimension above the number of balance-scale cells",
         basis_.dim, "RangeSmoothness");
  }
  pre_.range_residual = basis_.residual;
  if (basis_.residual > kSketchResidual) {
    fail(ErrorCode::Precondition, "ChainVerifier: range sketch does not capture the diagonal corners",
         basis_.residual, "RangeSmoothness");
  }
  for (int c = 0; c < (1 << balance); ++c) {
    const IndexRange cell = dyadic_cell(m, balance, c * (m >> balance));
    pre_.range_oscillation = std::max(pre_.range_oscillation, span_oscillation(basis_, cell));
  }
  if (!(pre_.range_oscillation < eps)) {
    fail(ErrorCode::Precondition, "ChainVerifier: diagonal corner ranges oscillate on balance-scale cells",
         pre_.range_oscillation, "RangeSmoothness");
  }

  // Every interval build_cover can ask about, so that certificates for many
  // (f, theta) share the work.
  const int levels = grid_level(phi.grid(), "ChainVerifier");
  for (int level = 0; level <= levels; ++level) {
    const int width = m >> level;
    for (int start = 0; start < m; start += width)
      for (int collar : {0, 1}) {
        const IndexRange r{std::max(0, start - collar), std::min(m, start + width + collar)};
        oscillation_.try_emplace({r.begin, r.end}, span_oscillation(basis_, r));
      }
  }
}

Certificate ChainVerifier::verify(const GridFunction& f, int theta) const {
  const int m = s_.grid().size();
  require_dims(f.size() == m, "verify_chain: function length does not match grid");
  for (int j = 0; j < m; ++j) {
    if (std::abs(f(j).imag()) > 0.0 || f(j).real() < 0.0 || f(j).real() > 1.0) {
      fail(ErrorCode::InvalidArgument, "verify_chain: test function must satisfy 0 <= f <= 1", f(j).real());
    }
  }
  const double eps = eps_;
  const double tol = opts_.tol;

  Certificate cert;
  cert.eps = eps;
  cert.theta = theta;
  cert.final_bound = 8.0 * eps;
  auto step = [&](std::string name, double lhs, double rhs, bool strict = false) {
    const bool pass = strict ? lhs < rhs : lhs <= rhs + tol;
    cert.steps.push_back({std::move(name), lhs, rhs, pass});
  };

  const CoverSpec cover = build_cover(
      [this](IndexRange r) {
        auto it = oscillation_.find({r.begin, r.end});
        return it != oscillation_.end() ? it->second : span_oscillation(basis_, r);
      },
      s_.grid(), theta, eps);
  cert.cover_level = cover.level;
  cert.collar = cover.collar;
  const auto [t1, t2] = build_averaging_pair(cover, x_);
  step("oscillation", cover.oscillation, eps, true);

  const CMatrix& s11 = s_.corner(0, 0);
  const CMatrix& s12 = s_.corner(0, 1);
  const CMatrix& s21 = s_.corner(1, 0);
  const CMatrix& s22 = s_.corner(1, 1);
  const GridFunction one = GridFunction::Ones(m);
  GridFunction gamma = GridFunction::Zero(m);
  for (int j = 0; j < m; ++j) gamma(j) = x_.member[j] ? 1.0 : 0.0;

  struct Piece {
    const char* name;
    GridFunction g;
  };
  const std::vector<Piece> pieces{{"f", f},
                                  {"gamma f", gamma.cwiseProduct(f)},
                                  {"(1-gamma) f", (one - gamma).cwiseProduct(f)}};
  const GridFunction s22_one = s22 * one;
  const GridFunction s11_one = s11 * one;

  for (const auto& [name, g] : pieces) {
    const GridFunction a11 = s11 * g, a22 = s22 * g, a12 = s12 * g, a21 = s21 * g;
    const GridFunction t1a = t1.apply(a11), t2a = t2.apply(a22);
    const double gnorm = g.cwiseAbs().maxCoeff();
    step(std::string("fix[1](") + name + ")", (t1a - a11).cwiseAbs().maxCoeff(), eps * gnorm);
    step(std::string("fix[2](") + name + ")", (t2a - a22).cwiseAbs().maxCoeff(), eps * gnorm);

    // S applied to [[g, g], [g, 1]] and [[1, g], [g, g]] is pointwise PSD.
    double det1 = std::numeric_limits<double>::infinity();
    double det2 = det1, psd1 = det1, psd2 = det1;
    double eq2_1 = -det1, eq2_2 = -det1;
    for (int p = 0; p < m; ++p) {
      CMatrix b1(2, 2), b2(2, 2);
      b1 << a11(p), a12(p), a21(p), s22_one(p);
      b2 << s11_one(p), a12(p), a21(p), a22(p);
      psd1 = std::min(psd1, lambda_min(HermitianMatrix::symmetrized(b1)));
      psd2 = std::min(psd2, lambda_min(HermitianMatrix::symmetrized(b2)));
      const double off = std::norm(a12(p));
      det1 = std::min(det1, a11(p).real() * s22_one(p).real() - off);
      det2 = std::min(det2, s11_one(p).real() * a22(p).real() - off);
      eq2_1 = std::max(eq2_1, off - t1a(p).real() - eps);
      eq2_2 = std::max(eq2_2, off - t2a(p).real() - eps);
    }
    step(std::string("positivity[1](") + name + ")", -psd1, 0.0);
    step(std::string("positivity[2](") + name + ")", -psd2, 0.0);
    step(std::string("determinant[1](") + name + ")", -det1, 0.0);
    step(std::string("determinant[2](") + name + ")", -det2, 0.0);
    step(std::string("schur[1](") + name + ")", eq2_1, 0.0);
    step(std::string("schur[2](") + name + ")", eq2_2, 0.0);
  }

  // Averaging interval: theta's balance-scale cell inside J.
  const IndexRange home = dyadic_cell(m, x_.balance_level, theta);
  const IndexRange avg{std::max(home.begin, cover.j_interval.begin), std::min(home.end, cover.j_interval.end)};
  cert.averaging = avg;
  double stray = 0.0;
  for (std::size_t i = 1; i < cover.rho.size(); ++i)
    for (int p = avg.begin; p < avg.end; ++p) stray = std::max(stray, cover.rho[i](p));
  step("rho vanishes on I", stray, 0.0);

  const double phi_rho = mean_over(cover.rho[0].cast<Complex>(), avg);
  auto averaging = [&](const char* label, const AveragingMap& t, const CMatrix& sii, const GridFunction& g,
                       bool on_x) {
    const GridFunction sg = sii * g;
    double int_s = 0.0, int_g = 0.0;
    for (int j = 0; j < m; ++j) {
      if (x_.member[j] != on_x) continue;
      int_s += sg(j).real();
      int_g += g(j).real();
    }
    const double lhs = mean_over(t.apply(sg), avg);
    const double mid = int_s / t.y_mass * phi_rho;
    const double rhs = int_g / t.y_mass * phi_rho;
    step(std::string(label) + " monotone", lhs, mid);
    step(std::string(label) + " preservation", std::abs(mid - rhs), 0.0);
    return lhs;
  };
  averaging("averaging[1](f)", t1, s11, f, true);
  averaging("averaging[2](f)", t2, s22, f, false);

  // gamma = 1_X exactly, so K = O = X and m(O \ K) = 0.
  step("cutoff budget", 0.0, eps * std::min(t1.y_mass, t2.y_mass) / m, true);

  const GridFunction gf = pieces[1].g;
  const GridFunction rest = pieces[2].g;
  const double tail1 = averaging("averaging[1]((1-gamma) f)", t1, s11, rest, true);
  const double tail2 = averaging("averaging[2](gamma f)", t2, s22, gf, false);
  step("tail[1]", tail1, eps);
  step("tail[2]", tail2, eps);

  auto avg_sq = [&](const GridFunction& g) {
    const GridFunction v = s12 * g;
    double acc = 0.0;
    for (int p = avg.begin; p < avg.end; ++p) acc += std::norm(v(p));
    return acc / avg.size();
  };
  const double a = avg_sq(gf);
  const double b = avg_sq(rest);
  step("average(gamma f)", a, tail2 + eps);
  step("average((1-gamma) f)", b, tail1 + eps);
  step("average(gamma f) <= 2 eps", a, 2.0 * eps);
  step("average((1-gamma) f) <= 2 eps", b, 2.0 * eps);

  cert.final_average = avg_sq(f);
  const double sa = std::sqrt(a), sb = std::sqrt(b);
  step("minkowski", cert.final_average, (sa + sb) * (sa + sb));
  step("final", cert.final_average, cert.final_bound);

  const GridFunction s12f = s12 * f;
  cert.retention = s12f.cwiseAbs().maxCoeff();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int p = home.begin; p < home.end; ++p) {
    lo = std::min(lo, std::norm(s12f(p)));
    hi = std::max(hi, std::norm(s12f(p)));
  }
  cert.grid_slack = hi - lo;

  cert.pass = std::all_of(cert.steps.begin(), cert.steps.end(), [](const ChainStep& s) { return s.pass; });
  return cert;
}

Certificate verify_chain(const BlockFormMap& s, const State& phi, const PatternSet& x, const GridFunction& f,
                         int theta, double eps, const ChainOptions& opts) {
  return ChainVerifier(s, phi, x, eps, opts).verify(f, theta);
}

BlockFormMap expectation_family_blocks(const State& phi, int smooth_level, double lambda) {
  const int levels = grid_level(phi.grid(), "expectation_family");
  if (smooth_level < 0 || smooth_level > levels) {
    fail(ErrorCode::InvalidArgument, "expectation_family: smooth level must lie in [0, L]", smooth_level);
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "expectation_family: lambda must lie in [0, 1]", lambda);
  }
  const int n = phi.n();
  const int m = phi.grid().size();
  const int width = m >> smooth_level;
  BlockFormMap s(n, phi.grid());
  for (int start = 0; start < m; start += width) {
    for (int a = 0; a < n; ++a) {
      RVector w(width);
      for (int q = 0; q < width; ++q) w(q) = phi.mu()(start + q) * phi.g()[start + q](a, a).real();
      const double mass = w.sum();
      // A cell the state does not see in corner aa is averaged uniformly.
      if (mass > 0.0) {
        w /= mass;
      } else {
        w.setConstant(1.0 / width);
      }
      for (int b = 0; b < n; ++b) {
        CMatrix& c = s.corner(a, b);
        for (int p = start; p < start + width; ++p)
          for (int q = 0; q < width; ++q) {
            const double d = a == b ? (1.0 - lambda) * w(q) : 0.0;
            c(p, start + q) = d + lambda / width;
          }
      }
    }
  }
  return s;
}

GridMap expectation_family(const State& phi, int smooth_level, double lambda) {
  return expectation_family_blocks(phi, smooth_level, lambda).to_grid_map();
}

const char* certificate_status_name(CertificateStatus s) noexcept {
  switch (s) {
    case CertificateStatus::Pass:
      return "true";
    case CertificateStatus::Fail:
      return "false";
    case CertificateStatus::Ineligible:
      return "ineligible";
  }
  return "ineligible";
}

std::vector<TradeoffRow> defect_tradeoff_scan(const State& phi, const PatternSet& x, int smooth_level,
                                              const std::vector<double>& lambdas, const GridFunction& f,
                                              const std::vector<double>& eps, int theta, const ChainOptions& opts) {
  require_dims(f.size() == phi.grid().size(), "defect_tradeoff_scan: function length does not match grid");
  struct Member {
    BlockFormMap s;
    double preservation;
    double retention;
    double identity_defect;
  };
  std::vector<Member> members;
  const MatrixFunction probe = tensor_embed(matrix_unit(phi.n(), 0, 1), f, phi.grid());
  for (double lambda : lambdas) {
    BlockFormMap s = expectation_family_blocks(phi, smooth_level, lambda);
    const MatrixFunction image = apply(s, probe);
    const double pres = preservation_defect(s, phi);
    const double retention = sup_norm(image);
    const double identity_defect = sup_norm(image - probe);
    members.push_back({std::move(s), pres, retention, identity_defect});
  }

  std::vector<TradeoffRow> rows;
  for (double e : eps) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      TradeoffRow row;
      row.lambda = lambdas[i];
      row.eps = e;
      row.preservation_defect = members[i].preservation;
      row.retention = members[i].retention;
      row.identity_defect = members[i].identity_defect;
      row.certified_bound = 8.0 * e;
      try {
        const ChainVerifier verifier(members[i].s, phi, x, e, opts);
        const Certificate cert = verifier.verify(f, theta);
        row.final_average = cert.final_average;
        row.status = cert.pass ? CertificateStatus::Pass : CertificateStatus::Fail;
      } catch (const Error& err) {
        if (err.code() != ErrorCode::Precondition) throw;
        row.status = CertificateStatus::Ineligible;
        row.reason = err.tag();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace cpapprox
