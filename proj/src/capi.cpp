/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "cpapprox/cpapprox.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "cpapprox/approximator.hpp"
#include "cpapprox/commands.hpp"
#include "cpapprox/error.hpp"
#include "cpapprox/sampling.hpp"
#include "cpapprox/serialize.hpp"

struct cpa_state {
  cpapprox::State value;
};

struct cpa_map {
  cpapprox::GridMap value;
};

struct cpa_report {
  cpapprox::Report value;
};

namespace {

struct LastError {
  std::string message;
  double witness = 0.0;
  std::string tag;
};

thread_local LastError last_error;

cpa_status to_status(cpapprox::ErrorCode code) {
  using cpapprox::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return CPA_ERR_INVALID_ARGUMENT;
    case ErrorCode::Dimension: return CPA_ERR_DIMENSION;
    case ErrorCode::NotPsd: return CPA_ERR_NOT_PSD;
    case ErrorCode::SpectralFloorViolation: return CPA_ERR_SPECTRAL_FLOOR;
    case ErrorCode::NotAState: return CPA_ERR_NOT_A_STATE;
    case ErrorCode::NotGridFaithful: return CPA_ERR_NOT_GRID_FAITHFUL;
    case ErrorCode::RangeCellTooCoarse: return CPA_ERR_RANGE_CELL_TOO_COARSE;
    case ErrorCode::Precondition: return CPA_ERR_PRECONDITION;
    case ErrorCode::DegenerateCorner: return CPA_ERR_DEGENERATE_CORNER;
    case ErrorCode::PatternScale: return CPA_ERR_PATTERN_SCALE;
    case ErrorCode::Cover: return CPA_ERR_COVER;
    case ErrorCode::Convergence: return CPA_ERR_CONVERGENCE;
    case ErrorCode::Config: return CPA_ERR_CONFIG;
    case ErrorCode::Internal: return CPA_ERR_INTERNAL;
  }
  return CPA_ERR_INTERNAL;
}

cpa_status set_error(cpa_status status, std::string message, double witness = 0.0, std::string tag = {}) {
  last_error = {std::move(message), witness, std::move(tag)};
  return status;
}

// Runs f, translating exceptions into status codes.
template <class F>
cpa_status guarded(F&& f) {
  try {
    f();
    last_error = {};
    return CPA_OK;
  } catch (const cpapprox::Error& e) {
    return set_error(to_status(e.code()), e.what(), e.witness(), e.tag());
  } catch (const nlohmann::json::exception& e) {
    return set_error(CPA_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(CPA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(CPA_ERR_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define CPA_REQUIRE(cond)                                                        \
  do {                                                                           \
    if (!(cond)) return set_error(CPA_ERR_INVALID_ARGUMENT, "null argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* cpa_version(void) { return "1.0.0"; }

const char* cpa_status_name(cpa_status status) {
  switch (status) {
    case CPA_OK: return "OK";
    case CPA_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case CPA_ERR_DIMENSION: return "Dimension";
    case CPA_ERR_NOT_PSD: return "NotPsd";
    case CPA_ERR_SPECTRAL_FLOOR: return "SpectralFloorViolation";
    case CPA_ERR_NOT_A_STATE: return "NotAState";
    case CPA_ERR_NOT_GRID_FAITHFUL: return "NotGridFaithful";
    case CPA_ERR_RANGE_CELL_TOO_COARSE: return "RangeCellTooCoarse";
    case CPA_ERR_PRECONDITION: return "Precondition";
    case CPA_ERR_DEGENERATE_CORNER: return "DegenerateCorner";
    case CPA_ERR_PATTERN_SCALE: return "PatternScale";
    case CPA_ERR_COVER: return "Cover";
    case CPA_ERR_CONVERGENCE: return "Convergence";
    case CPA_ERR_CONFIG: return "Config";
    case CPA_ERR_IO: return "IO";
    case CPA_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* cpa_last_error(void) { return last_error.message.c_str(); }
double cpa_last_error_witness(void) { return last_error.witness; }
const char* cpa_last_error_tag(void) { return last_error.tag.c_str(); }

void cpa_string_free(char* s) { std::free(s); }

cpa_status cpa_state_from_json(const char* json, cpa_state** out) {
  CPA_REQUIRE(json && out);
  return guarded([&] { *out = new cpa_state{cpapprox::state_from_json(nlohmann::json::parse(json))}; });
}

cpa_status cpa_state_demo(cpa_state** out) {
  CPA_REQUIRE(out);
  return guarded([&] { *out = new cpa_state{cpapprox::demo_state()}; });
}

cpa_status cpa_state_rudin(int level, int balance_level, cpa_state** out) {
  CPA_REQUIRE(out);
  return guarded([&] { *out = new cpa_state{cpapprox::rudin_state(cpapprox::balanced_pattern(level, balance_level))}; });
}

cpa_status cpa_state_random(uint64_t seed, int n, int m, int pieces, double lo, double hi, int diagonal,
                            cpa_state** out) {
  CPA_REQUIRE(out);
  return guarded([&] {
    if (n < 1 || m < 1 || pieces < 1 || pieces > m) {
      cpapprox::fail(cpapprox::ErrorCode::InvalidArgument, "cpa_state_random: bad sizes");
    }
    cpapprox::Rng rng(seed);
    *out = new cpa_state{cpapprox::random_piecewise_state(rng, n, cpapprox::Grid(m), pieces, lo, hi, diagonal != 0)};
  });
}

cpa_status cpa_state_to_json(const cpa_state* state, char** json) {
  CPA_REQUIRE(state && json);
  return guarded([&] { *json = copy_string(cpapprox::state_to_json(state->value).dump()); });
}

cpa_status cpa_state_dims(const cpa_state* state, int* n, int* m) {
  CPA_REQUIRE(state && n && m);
  *n = state->value.n();
  *m = state->value.grid().size();
  return CPA_OK;
}

cpa_status cpa_state_faithfulness_margin(const cpa_state* state, double* margin) {
  CPA_REQUIRE(state && margin);
  return guarded([&] { *margin = cpapprox::faithfulness_margin(state->value); });
}

cpa_status cpa_state_is_diagonal(const cpa_state* state, int* diagonal) {
  CPA_REQUIRE(state && diagonal);
  return guarded([&] { *diagonal = cpapprox::is_diagonal(state->value) ? 1 : 0; });
}

void cpa_state_free(cpa_state* state) { delete state; }

cpa_status cpa_build_approximation(const cpa_state* state, const char* const* functions, size_t count, double eps,
                                   cpa_map** out, char** diagnostics_json) {
  CPA_REQUIRE(state && out && (functions || count == 0));
  return guarded([&] {
    std::vector<std::string> names;
    for (size_t i = 0; i < count; ++i) {
      if (!functions[i]) cpapprox::fail(cpapprox::ErrorCode::InvalidArgument, "null function name");
      names.emplace_back(functions[i]);
    }
    if (names.empty()) names.emplace_back("constant");
    cpapprox::Approximation a = cpapprox::build_T(state->value, cpapprox::function_presets(names, state->value.grid()), eps);
    if (diagnostics_json) *diagnostics_json = copy_string(cpapprox::diagnostics_to_json(a.diagnostics).dump());
    *out = new cpa_map{std::move(a.map)};
  });
}

cpa_status cpa_map_verify_ucp(const cpa_map* map, double tol, int* is_ucp, double* unitality_defect,
                              double* min_choi_eigenvalue) {
  CPA_REQUIRE(map && is_ucp);
  return guarded([&] {
    const cpapprox::UcpReport r = cpapprox::verify_ucp(map->value, tol);
    *is_ucp = r.is_ucp ? 1 : 0;
    if (unitality_defect) *unitality_defect = r.unitality_defect;
    if (min_choi_eigenvalue) *min_choi_eigenvalue = r.min_choi_eigenvalue;
  });
}

cpa_status cpa_map_preservation_defect(const cpa_map* map, const cpa_state* state, double* defect) {
  CPA_REQUIRE(map && state && defect);
  return guarded([&] { *defect = cpapprox::preservation_defect(map->value, state->value); });
}

cpa_status cpa_map_numerical_rank(const cpa_map* map, double cutoff, size_t* rank) {
  CPA_REQUIRE(map && rank);
  return guarded([&] { *rank = cpapprox::numerical_rank(map->value, cutoff); });
}

cpa_status cpa_map_to_json(const cpa_map* map, char** json) {
  CPA_REQUIRE(map && json);
  return guarded([&] { *json = copy_string(cpapprox::map_to_json(map->value).dump()); });
}

cpa_status cpa_map_from_json(const char* json, cpa_map** out) {
  CPA_REQUIRE(json && out);
  return guarded([&] { *out = new cpa_map{cpapprox::map_from_json(nlohmann::json::parse(json))}; });
}

void cpa_map_free(cpa_map* map) { delete map; }

cpa_status cpa_run(const char* config_json, cpa_report** out) {
  CPA_REQUIRE(config_json && out);
  return guarded([&] {
    nlohmann::json config;
    try {
      config = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      cpapprox::fail(cpapprox::ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
    }
    *out = new cpa_report{cpapprox::run(config)};
  });
}

int cpa_report_exit_code(const cpa_report* report) { return report ? report->value.exit_code : 2; }

cpa_status cpa_report_json(const cpa_report* report, char** json) {
  CPA_REQUIRE(report && json);
  return guarded([&] { *json = copy_string(report->value.json.dump(2)); });
}

const char* cpa_report_hash(const cpa_report* report) { return report ? report->value.hash.c_str() : ""; }

size_t cpa_report_file_count(const cpa_report* report) { return report ? report->value.files.size() : 0; }

const char* cpa_report_file_name(const cpa_report* report, size_t index) {
  if (!report || index >= report->value.files.size()) return nullptr;
  return report->value.files[index].first.c_str();
}

const char* cpa_report_file_contents(const cpa_report* report, size_t index) {
  if (!report || index >= report->value.files.size()) return nullptr;
  return report->value.files[index].second.c_str();
}

void cpa_report_free(cpa_report* report) { delete report; }

}  // extern "C"
