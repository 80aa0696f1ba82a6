/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "cpapprox/serialize.hpp"

#include <cmath>
#include <string>

#include "cpapprox/error.hpp"

namespace cpapprox {

namespace {

template <class T>
T field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) fail(ErrorCode::InvalidArgument, std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("field '") + name + "': " + e.what());
  }
}

Json range_to_json(IndexRange r) { return Json::array({r.begin, r.end}); }

}  // namespace

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail(ErrorCode::InvalidArgument, "complex number must be [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Json matrix_to_json(const CMatrix& a) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(complex_to_json(a(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) fail(ErrorCode::InvalidArgument, "matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix a(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) {
      fail(ErrorCode::Dimension, "matrix rows have different lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = complex_from_json(j[r][c]);
  }
  return a;
}

Json function_to_json(const MatrixFunction& h) {
  Json values = Json::array();
  for (const auto& v : h.values) values.push_back(matrix_to_json(v));
  return {{"n", h.n}, {"m", h.grid.size()}, {"values", std::move(values)}};
}

MatrixFunction function_from_json(const Json& j) {
  const int n = field<int>(j, "n");
  const int m = field<int>(j, "m");
  const Json values = field<Json>(j, "values");
  require_dims(values.is_array() && static_cast<int>(values.size()) == m, "MatrixFunction: one value per grid point");
  MatrixFunction h(n, Grid(m));
  for (int k = 0; k < m; ++k) {
    h.values[k] = matrix_from_json(values[k]);
    require_dims(h.values[k].rows() == n && h.values[k].cols() == n, "MatrixFunction: values must be n x n");
  }
  return h;
}

Json state_to_json(const State& phi) {
  Json g = Json::array();
  for (const auto& gj : phi.g()) g.push_back(matrix_to_json(gj));
  Json mu = Json::array();
  for (int j = 0; j < phi.grid().size(); ++j) mu.push_back(phi.mu()(j));
  return {{"n", phi.n()}, {"m", phi.grid().size()}, {"mu", std::move(mu)}, {"g", std::move(g)}};
}

State state_from_json(const Json& j) {
  const int n = field<int>(j, "n");
  const int m = field<int>(j, "m");
  if (n < 1 || m < 1) fail(ErrorCode::InvalidArgument, "State: n and m must be positive");
  const auto mu_list = field<std::vector<double>>(j, "mu");
  require_dims(static_cast<int>(mu_list.size()) == m, "State: mu must have m entries");
  const Json g_list = field<Json>(j, "g");
  require_dims(g_list.is_array() && static_cast<int>(g_list.size()) == m, "State: g must have m entries");
  RVector mu(m);
  std::vector<CMatrix> g(m);
  for (int k = 0; k < m; ++k) {
    mu(k) = mu_list[k];
    g[k] = matrix_from_json(g_list[k]);
    require_dims(g[k].rows() == n && g[k].cols() == n, "State: densities must be n x n");
  }
  return make_state(Grid(m), std::move(mu), std::move(g));
}

Json pattern_to_json(const PatternSet& x) {
  return {{"L", x.level}, {"L0", x.balance_level}, {"members", x.members()}};
}

PatternSet pattern_from_json(const Json& j) {
  PatternSet x;
  x.level = field<int>(j, "L");
  x.balance_level = field<int>(j, "L0");
  if (x.level < 1 || x.level > 24) fail(ErrorCode::PatternScale, "PatternSet: L must lie in [1, 24]", x.level);
  x.member.assign(std::size_t{1} << x.level, false);
  for (int idx : field<std::vector<int>>(j, "members")) {
    if (idx < 0 || idx >= x.size()) fail(ErrorCode::InvalidArgument, "PatternSet: member index out of range", idx);
    x.member[idx] = true;
  }
  return x;
}

Json map_to_json(const GridMap& s) {
  Json comps = Json::array();
  for (const auto& [key, kmat] : s.components()) {
    comps.push_back({{"k", key.first}, {"j", key.second}, {"matrix", matrix_to_json(kmat)}});
  }
  Json out{{"n", s.n()}, {"m", s.grid().size()}, {"structure", s.structure}, {"components", std::move(comps)}};
  if (s.rank_bound) out["rank_bound"] = *s.rank_bound;
  if (!s.cell_blocks.empty()) out["cell_blocks"] = s.cell_blocks;
  return out;
}

GridMap map_from_json(const Json& j) {
  const int n = field<int>(j, "n");
  const int m = field<int>(j, "m");
  GridMap s(n, Grid(m));
  if (j.contains("structure")) s.structure = field<std::string>(j, "structure");
  if (j.contains("rank_bound")) s.rank_bound = field<std::size_t>(j, "rank_bound");
  if (j.contains("cell_blocks")) s.cell_blocks = field<std::vector<std::vector<int>>>(j, "cell_blocks");
  const Json comps = field<Json>(j, "components");
  if (!comps.is_array()) fail(ErrorCode::InvalidArgument, "GridMap: components must be an array");
  for (const auto& c : comps) s.add_component(field<int>(c, "k"), field<int>(c, "j"), matrix_from_json(field<Json>(c, "matrix")));
  return s;
}

Json block_map_to_json(const BlockFormMap& r) {
  Json corners = Json::array();
  for (int a = 0; a < r.n(); ++a)
    for (int b = 0; b < r.n(); ++b) corners.push_back(matrix_to_json(r.corner(a, b)));
  return {{"n", r.n()}, {"m", r.grid().size()}, {"corners", std::move(corners)}};
}

BlockFormMap block_map_from_json(const Json& j) {
  const int n = field<int>(j, "n");
  const int m = field<int>(j, "m");
  BlockFormMap r(n, Grid(m));
  const Json corners = field<Json>(j, "corners");
  require_dims(corners.is_array() && static_cast<int>(corners.size()) == n * n, "BlockFormMap: n^2 corners expected");
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      CMatrix c = matrix_from_json(corners[a * n + b]);
      require_dims(c.rows() == m && c.cols() == m, "BlockFormMap: corners must be m x m");
      r.corner(a, b) = std::move(c);
    }
  return r;
}

Json ucp_to_json(const UcpReport& r) {
  return {{"unitality_defect", r.unitality_defect},
          {"min_choi_eigenvalue", r.min_choi_eigenvalue},
          {"hermiticity_defect", r.hermiticity_defect},
          {"is_ucp", r.is_ucp},
          {"worst_component", Json::array({r.worst_component.first, r.worst_component.second})}};
}

Json diagnostics_to_json(const ApproximatorDiagnostics& d) {
  return {{"eps", d.eps},
          {"delta", d.delta},
          {"gamma", d.gamma},
          {"r", d.r},
          {"gnorm", d.gnorm},
          {"eta", d.eta},
          {"eta_halvings", d.eta_halvings},
          {"domain_cells", d.domain_cells},
          {"range_cells", d.range_cells},
          {"cell_count", d.cell_count},
          {"rank_bound", d.rank_bound},
          {"bad_points", d.bad_points},
          {"spectral_floors", d.spectral_floors},
          {"floor_requirements", d.floor_requirements},
          {"sandwich_deviations", d.sandwich_deviations},
          {"sandwich_bounds", d.sandwich_bounds},
          {"probe_defect", d.probe_defect},
          {"matrix_defect", d.matrix_defect}};
}

Json reformulation_to_json(const ReformulationDiagnostics& d) {
  return {{"input_preservation_defect", d.input_preservation_defect},
          {"input_unitality_defect", d.input_unitality_defect},
          {"unitality_defect", d.unitality_defect},
          {"min_choi_eigenvalue", d.min_choi_eigenvalue},
          {"preservation_defect", d.preservation_defect},
          {"block_leakage", d.block_leakage},
          {"symmetry_defect", d.symmetry_defect},
          {"amplification", d.amplification ? Json(*d.amplification) : Json(nullptr)},
          {"corner_norms", d.corner_norms}};
}

Json certificate_to_json(const Certificate& c) {
  Json steps = Json::array();
  for (const auto& s : c.steps) {
    steps.push_back({{"name", s.name}, {"lhs", number_or_null(s.lhs)}, {"rhs", number_or_null(s.rhs)}, {"pass", s.pass}});
  }
  return {{"eps", c.eps},
          {"theta", c.theta},
          {"cover_level", c.cover_level},
          {"collar", c.collar},
          {"averaging_interval", range_to_json(c.averaging)},
          {"steps", std::move(steps)},
          {"retention", c.retention},
          {"final_average", c.final_average},
          {"final_bound", c.final_bound},
          {"grid_slack", c.grid_slack},
          {"pass", c.pass}};
}

}  // namespace cpapprox
