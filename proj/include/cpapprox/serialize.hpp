/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

// JSON encodings. Complex numbers are [re, im], matrices are arrays of rows.
//
//   MatrixFunction  {n, m, values}
//   State           {n, m, mu, g}
//   PatternSet      {L, L0, members}           members sorted, 0-based
//   GridMap         {n, m, structure, components: [{k, j, matrix}]}   omitted components are zero
//   BlockFormMap    {n, m, corners}            corners[a * n + b] is an m x m matrix

#include <json.hpp>

#include "cpapprox/approximator.hpp"
#include "cpapprox/obstruction.hpp"
#include "cpapprox/reformulator.hpp"
#include "cpapprox/states.hpp"

namespace cpapprox {

using Json = nlohmann::json;

Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j);

Json matrix_to_json(const CMatrix& a);
CMatrix matrix_from_json(const Json& j);

Json function_to_json(const MatrixFunction& h);
MatrixFunction function_from_json(const Json& j);

Json state_to_json(const State& phi);
// Goes through make_state, so the usual validation and normalization apply.
State state_from_json(const Json& j);

Json pattern_to_json(const PatternSet& x);
PatternSet pattern_from_json(const Json& j);

Json map_to_json(const GridMap& s);
GridMap map_from_json(const Json& j);

Json block_map_to_json(const BlockFormMap& r);
BlockFormMap block_map_from_json(const Json& j);

Json ucp_to_json(const UcpReport& r);
Json diagnostics_to_json(const ApproximatorDiagnostics& d);
Json reformulation_to_json(const ReformulationDiagnostics& d);
Json certificate_to_json(const Certificate& c);

// NaN and infinities become null.
Json number_or_null(double v);

}  // namespace cpapprox
