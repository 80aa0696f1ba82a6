/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

// Batch commands behind the CLI and the C API. A run takes a JSON config
// and produces a JSON report plus named output files (CSV, JSON).
//
// Config keys (all optional except "command"):
//
//   command        "approximate" | "counterexample" | "selftest"
//   state          {"generator": "demo"}
//                  {"generator": "random", "n", "m", "pieces", "lo", "hi", "diagonal"}
//                  {"generator": "rudin", "level", "balance_level"}
//                  {"generator": "inline", "data": <State JSON>}
//   functions      preset names, default ["constant", "linear", "quadratic", "cosine"]
//   eps            default [0.4, 0.2, 0.1]
//   level          pattern level L, default 10
//   smooth_level   balance level L0, default 5
//   lambda         expectation family parameters, default [0, 0.25, 0.5, 1]
//   theta          base points for certificates, default [m / 2]
//   seed           default 24301
//   samples        random elements for the preservation residual, default 200
//   tol            {"ucp": 1e-9, "preservation": 1e-9, "chain": 1e-7}

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cpapprox/serialize.hpp"

namespace cpapprox {

struct Tolerances {
  double ucp = 1e-9;
  double preservation = 1e-9;
  double chain = 1e-7;
};

struct RunConfig {
  std::string command;
  Json state = {{"generator", "demo"}};
  std::vector<std::string> functions{"constant", "linear", "quadratic", "cosine"};
  std::vector<double> eps{0.4, 0.2, 0.1};
  int level = 10;
  int smooth_level = 5;
  std::vector<double> lambda{0.0, 0.25, 0.5, 1.0};
  std::vector<int> theta;
  std::uint64_t seed = 24301;
  int samples = 200;
  Tolerances tol;
};

// Throws Config on unknown keys, wrong types or out-of-range values.
RunConfig parse_config(const Json& j);
Json config_to_json(const RunConfig& c);

// Sets a tolerance from "NAME=VALUE" (NAME in ucp, preservation, chain).
void set_tolerance(Tolerances& tol, const std::string& assignment);

State state_from_spec(const Json& spec);

struct Report {
  Json json;
  std::vector<std::pair<std::string, std::string>> files;  // name, contents
  int exit_code = 0;
  std::string hash;
};

// FNV-1a 64 over the compact dump with the "timings" and "hash" keys removed.
std::string report_hash(const Json& report);

Report run_approximate(const RunConfig& c);
Report run_counterexample(const RunConfig& c);
Report run_selftest(const RunConfig& c);

// Dispatches on c.command. Library errors become reports with exit code 2
// (bad input or violated precondition) or 1 (anything else).
Report run(const RunConfig& c);
Report run(const Json& config);

}  // namespace cpapprox
