/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "cpapprox/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "cpapprox/error.hpp"
#include "cpapprox/sampling.hpp"

namespace cpapprox {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string csv_number(double v) { return std::isfinite(v) ? fmt("%.10g", v) : "nan"; }

std::string label(double v) { return fmt("%g", v); }

class Checks {
 public:
  bool add(const std::string& name, bool pass, double value, double bound) {
    items_.push_back({{"name", name}, {"pass", pass}, {"value", number_or_null(value)}, {"bound", number_or_null(bound)}});
    ok_ = ok_ && pass;
    return pass;
  }
  void add_error(const std::string& name, const Error& e) {
    items_.push_back({{"name", name},
                      {"pass", false},
                      {"error", error_code_name(e.code())},
                      {"message", e.what()},
                      {"value", number_or_null(e.witness())},
                      {"tag", e.tag()}});
    ok_ = false;
  }
  bool ok() const noexcept { return ok_; }
  const Json& json() const noexcept { return items_; }

 private:
  Json items_ = Json::array();
  bool ok_ = true;
};

Json error_json(const Error& e) {
  return {{"code", error_code_name(e.code())}, {"message", e.what()}, {"witness", number_or_null(e.witness())}, {"tag", e.tag()}};
}

template <class T>
T config_value(const Json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::Config, "config: bad value for '" + key + "'");
  }
}

double max_abs_eval_defect(const GridMap& s, const State& phi, const std::vector<MatrixFunction>& samples) {
  double worst = 0.0;
  for (const auto& h : samples) {
    const double scale = std::max(sup_norm(h), 1e-300);
    worst = std::max(worst, std::abs(eval_state(phi, apply(s, h)) - eval_state(phi, h)) / scale);
  }
  return worst;
}

void finish(Report& rep, Json& out, const Checks& checks, Json timings) {
  out["checks"] = checks.json();
  out["pass"] = checks.ok();
  rep.exit_code = checks.ok() ? 0 : 1;
  out["exit_code"] = rep.exit_code;
  out["timings"] = std::move(timings);
  rep.hash = report_hash(out);
  out["hash"] = rep.hash;
  rep.json = std::move(out);
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

RunConfig parse_config(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::Config, "config must be a JSON object");
  static const std::set<std::string> known{"command", "state", "functions", "eps", "level", "smooth_level",
                                           "lambda", "theta", "seed", "samples", "tol"};
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) fail(ErrorCode::Config, "config: unknown key '" + key + "'");
    if (key == "command") c.command = config_value<std::string>(value, key);
    if (key == "state") {
      if (!value.is_object()) fail(ErrorCode::Config, "config: 'state' must be an object");
      c.state = value;
    }
    if (key == "functions") c.functions = config_value<std::vector<std::string>>(value, key);
    if (key == "eps") c.eps = config_value<std::vector<double>>(value, key);
    if (key == "level") c.level = config_value<int>(value, key);
    if (key == "smooth_level") c.smooth_level = config_value<int>(value, key);
    if (key == "lambda") c.lambda = config_value<std::vector<double>>(value, key);
    if (key == "theta") c.theta = config_value<std::vector<int>>(value, key);
    if (key == "seed") c.seed = config_value<std::uint64_t>(value, key);
    if (key == "samples") c.samples = config_value<int>(value, key);
    if (key == "tol") {
      if (!value.is_object()) fail(ErrorCode::Config, "config: 'tol' must be an object");
      for (const auto& [name, v] : value.items()) {
        set_tolerance(c.tol, name + "=" + fmt("%.17g", config_value<double>(v, "tol." + name)));
      }
    }
  }
  if (c.command.empty()) fail(ErrorCode::Config, "config: 'command' is required");
  if (c.eps.empty()) fail(ErrorCode::Config, "config: 'eps' must not be empty");
  for (double e : c.eps)
    if (!(e > 0.0 && std::isfinite(e))) fail(ErrorCode::Config, "config: eps values must be positive", e);
  for (double l : c.lambda)
    if (!(l >= 0.0 && l <= 1.0)) fail(ErrorCode::Config, "config: lambda values must lie in [0, 1]", l);
  if (c.functions.empty()) fail(ErrorCode::Config, "config: 'functions' must not be empty");
  if (c.samples < 1) fail(ErrorCode::Config, "config: 'samples' must be positive", c.samples);
  return c;
}

Json config_to_json(const RunConfig& c) {
  return {{"command", c.command},
          {"state", c.state},
          {"functions", c.functions},
          {"eps", c.eps},
          {"level", c.level},
          {"smooth_level", c.smooth_level},
          {"lambda", c.lambda},
          {"theta", c.theta},
          {"seed", c.seed},
          {"samples", c.samples},
          {"tol", {{"ucp", c.tol.ucp}, {"preservation", c.tol.preservation}, {"chain", c.tol.chain}}}};
}

void set_tolerance(Tolerances& tol, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) fail(ErrorCode::Config, "tolerance must be NAME=VALUE: " + assignment);
  const std::string name = assignment.substr(0, eq);
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(assignment.substr(eq + 1), &used);
    if (used != assignment.size() - eq - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    fail(ErrorCode::Config, "tolerance value is not a number: " + assignment);
  }
  if (!(value > 0.0 && std::isfinite(value))) fail(ErrorCode::Config, "tolerance must be positive: " + assignment, value);
  if (name == "ucp") {
    tol.ucp = value;
  } else if (name == "preservation") {
    tol.preservation = value;
  } else if (name == "chain") {
    tol.chain = value;
  } else {
    fail(ErrorCode::Config, "unknown tolerance '" + name + "' (expected ucp, preservation or chain)");
  }
}

State state_from_spec(const Json& spec) {
  if (!spec.is_object() || !spec.contains("generator")) fail(ErrorCode::Config, "state: 'generator' is required");
  const auto gen = config_value<std::string>(spec["generator"], "state.generator");
  auto get_int = [&](const char* key, int fallback) {
    return spec.contains(key) ? config_value<int>(spec[key], std::string("state.") + key) : fallback;
  };
  auto get_double = [&](const char* key, double fallback) {
    return spec.contains(key) ? config_value<double>(spec[key], std::string("state.") + key) : fallback;
  };
  if (gen == "demo") return demo_state();
  if (gen == "random") {
    const int n = get_int("n", 2);
    const int m = get_int("m", 128);
    const int pieces = get_int("pieces", 8);
    if (n < 1 || m < 1 || pieces < 1 || pieces > m) fail(ErrorCode::Config, "state: bad random generator sizes");
    const auto seed = spec.contains("seed") ? config_value<std::uint64_t>(spec["seed"], "state.seed") : 1;
    const bool diagonal = spec.contains("diagonal") && config_value<bool>(spec["diagonal"], "state.diagonal");
    Rng rng(seed);
    return random_piecewise_state(rng, n, Grid(m), pieces, get_double("lo", 0.1), get_double("hi", 2.0), diagonal);
  }
  if (gen == "rudin") return rudin_state(balanced_pattern(get_int("level", 10), get_int("balance_level", 5)));
  if (gen == "inline") {
    if (!spec.contains("data")) fail(ErrorCode::Config, "state: inline generator needs 'data'");
    return state_from_json(spec["data"]);
  }
  fail(ErrorCode::Config, "state: unknown generator '" + gen + "'");
}

std::string report_hash(const Json& report) {
  Json copy = report;
  if (copy.is_object()) {
    copy.erase("timings");
    copy.erase("hash");
  }
  const std::string text = copy.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// approximate

Report run_approximate(const RunConfig& c) {
  Report rep;
  Json out{{"command", "approximate"}, {"config", config_to_json(c)}};
  Json timings = Json::object();
  Checks checks;

  const State phi = state_from_spec(c.state);
  const double margin = faithfulness_margin(phi);
  out["state"] = {{"n", phi.n()}, {"m", phi.grid().size()}, {"margin", margin}, {"provenance", phi.provenance()}};
  if (!(margin > 0.0)) fail(ErrorCode::NotGridFaithful, "approximate: state is not grid-faithful", margin);

  const auto funcs = function_presets(c.functions, phi.grid());
  Rng rng(c.seed);
  std::vector<MatrixFunction> samples;
  for (int i = 0; i < c.samples; ++i) samples.push_back(random_matrix_function(rng, phi.n(), phi.grid()));

  std::ostringstream csv;
  csv << "eps,delta,gamma,cell_count,rank_bound,numerical_rank,unitality_defect,min_choi_eigenvalue,"
         "preservation_residual,preservation_defect,probe_defect,matrix_defect\n";
  Json stages = Json::array();
  std::vector<double> probe_defects;
  for (double eps : c.eps) {
    const std::string tag = "eps=" + label(eps) + " ";
    const auto t0 = Clock::now();
    ApproximatorOptions opts;
    opts.seed = c.seed;
    const Approximation a = build_T(phi, funcs, eps, opts);
    const UcpReport ucp = verify_ucp(a.map, c.tol.ucp);
    const double residual = max_abs_eval_defect(a.map, phi, samples);
    const double exact = preservation_defect(a.map, phi);
    const std::size_t rank = numerical_rank(a.map, 1e-9);
    timings["eps=" + label(eps)] = seconds_since(t0);
    const auto& d = a.diagnostics;

    checks.add(tag + "ucp", ucp.is_ucp, std::max(ucp.unitality_defect, -ucp.min_choi_eigenvalue), c.tol.ucp);
    checks.add(tag + "preservation residual", residual <= c.tol.preservation, residual, c.tol.preservation);
    checks.add(tag + "preservation defect", exact <= c.tol.preservation, exact, c.tol.preservation);
    checks.add(tag + "probe defect", d.probe_defect <= eps, d.probe_defect, eps);
    checks.add(tag + "matrix defect", d.matrix_defect <= 7.0 * eps / 8.0, d.matrix_defect, 7.0 * eps / 8.0);
    checks.add(tag + "rank", rank <= d.rank_bound, static_cast<double>(rank), static_cast<double>(d.rank_bound));
    probe_defects.push_back(d.probe_defect);

    stages.push_back({{"eps", eps},
                      {"diagnostics", diagnostics_to_json(d)},
                      {"ucp", ucp_to_json(ucp)},
                      {"preservation_residual", residual},
                      {"preservation_defect", exact},
                      {"numerical_rank", rank}});
    csv << csv_number(eps) << ',' << csv_number(d.delta) << ',' << csv_number(d.gamma) << ',' << d.cell_count << ','
        << d.rank_bound << ',' << rank << ',' << csv_number(ucp.unitality_defect) << ','
        << csv_number(ucp.min_choi_eigenvalue) << ',' << csv_number(residual) << ',' << csv_number(exact) << ','
        << csv_number(d.probe_defect) << ',' << csv_number(d.matrix_defect) << '\n';
  }
  for (std::size_t i = 1; i < c.eps.size(); ++i) {
    if (c.eps[i] < c.eps[i - 1]) {
      checks.add("probe defect nonincreasing eps=" + label(c.eps[i]), probe_defects[i] <= probe_defects[i - 1],
                 probe_defects[i], probe_defects[i - 1]);
    }
  }
  out["stages"] = std::move(stages);
  rep.files.emplace_back("approximate.csv", csv.str());
  finish(rep, out, checks, std::move(timings));
  return rep;
}

// ---------------------------------------------------------------------------
// counterexample

Report run_counterexample(const RunConfig& c) {
  Report rep;
  Json out{{"command", "counterexample"}, {"config", config_to_json(c)}};
  Json timings = Json::object();
  Checks checks;

  if (!(c.level > c.smooth_level && c.smooth_level >= 1)) {
    fail(ErrorCode::PatternScale, "counterexample: levels must satisfy L > L0 >= 1", c.smooth_level);
  }
  if (c.level > 16) fail(ErrorCode::PatternScale, "counterexample: level above 16 is too large for dense corners", c.level);
  auto t0 = Clock::now();
  const PatternSet x = balanced_pattern(c.level, c.smooth_level);
  const State phi = rudin_state(x);
  const Grid& grid = phi.grid();
  const int m = grid.size();

  std::vector<int> thetas = c.theta.empty() ? std::vector<int>{m / 2} : c.theta;
  for (int t : thetas)
    if (t < 0 || t >= m) fail(ErrorCode::Config, "counterexample: theta outside the grid", t);
  const auto funcs = function_presets(c.functions, grid);
  for (std::size_t i = 0; i < funcs.size(); ++i) {
    const bool in_range = (funcs[i].imag().cwiseAbs().maxCoeff() == 0.0) && funcs[i].real().minCoeff() >= 0.0 &&
                          funcs[i].real().maxCoeff() <= 1.0;
    if (!in_range) fail(ErrorCode::Config, "counterexample: function '" + c.functions[i] + "' does not satisfy 0 <= f <= 1");
  }

  const double margin = faithfulness_margin(phi);
  const Complex half = eval_state(phi, tensor_embed(matrix_unit(2, 0, 0), GridFunction::Ones(m), grid));
  checks.add("pattern balanced", pattern_is_balanced(x), x.balance_level, x.level);
  checks.add("faithfulness margin", margin == 0.0, margin, 0.0);
  checks.add("phi(e11 (x) 1)", half == Complex(0.5, 0.0), std::abs(half - Complex(0.5, 0.0)), 0.0);
  out["pattern"] = {{"L", x.level}, {"L0", x.balance_level}, {"size", x.size()}, {"members", x.members().size()}};
  timings["setup"] = seconds_since(t0);

  t0 = Clock::now();
  const BlockFormMap s0 = expectation_family_blocks(phi, c.smooth_level, 0.0);
  const MatrixFunction probe = tensor_embed(matrix_unit(2, 0, 1), GridFunction::Ones(m), grid);
  const double identity_defect = sup_norm(apply(s0, probe) - probe);
  checks.add("identity defect on e12 (x) 1", std::abs(identity_defect - 1.0) <= 1e-12, identity_defect, 1.0);

  ChainOptions opts;
  opts.tol = c.tol.chain;
  opts.seed = c.seed;
  Json certs = Json::array();
  for (double eps : c.eps) {
    const std::string tag = "eps=" + label(eps);
    try {
      const ChainVerifier verifier(s0, phi, x, eps, opts);
      for (std::size_t i = 0; i < funcs.size(); ++i) {
        for (int theta : thetas) {
          const Certificate cert = verifier.verify(funcs[i], theta);
          const std::string name = "certificate " + tag + " f=" + c.functions[i] + " theta=" + std::to_string(theta);
          checks.add(name, cert.pass && cert.final_average <= cert.final_bound, cert.final_average, cert.final_bound);
          checks.add("retention " + tag + " f=" + c.functions[i] + " theta=" + std::to_string(theta),
                     cert.retention == 0.0, cert.retention, 0.0);
          Json cj = certificate_to_json(cert);
          cj["function"] = c.functions[i];
          certs.push_back(std::move(cj));
        }
      }
    } catch (const Error& e) {
      checks.add_error("certificate " + tag, e);
    }
  }
  timings["certificates"] = seconds_since(t0);

  t0 = Clock::now();
  {
    const double eps = *std::min_element(c.eps.begin(), c.eps.end());
    std::string tag;
    double witness = 0.0;
    try {
      const ChainVerifier rejected(BlockFormMap::from_grid_map(GridMap::identity(2, grid)), phi, x, std::min(eps, 1.0),
                                   opts);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Precondition) tag = e.tag();
      witness = e.witness();
    }
    checks.add("identity map rejected (RangeSmoothness)", tag == "RangeSmoothness", witness,
               static_cast<double>(1 << c.smooth_level));
  }
  timings["identity"] = seconds_since(t0);

  t0 = Clock::now();
  const auto rows = defect_tradeoff_scan(phi, x, c.smooth_level, c.lambda, funcs.front(), c.eps, thetas.front(), opts);
  std::ostringstream csv;
  csv << "lambda,eps,preservation_defect,retention,identity_defect,certified_bound,final_average,pass\n";
  Json scan = Json::array();
  for (const auto& r : rows) {
    const std::string tag = "lambda=" + label(r.lambda) + " eps=" + label(r.eps);
    if (r.lambda > 0.0) {
      checks.add("scan preservation defect positive " + tag, r.preservation_defect > 0.0, r.preservation_defect, 0.0);
      checks.add("scan retention positive " + tag, r.retention > 0.0, r.retention, 0.0);
      checks.add("scan ineligible " + tag, r.status == CertificateStatus::Ineligible, r.preservation_defect, 0.0);
    } else {
      checks.add("scan certified " + tag, r.status == CertificateStatus::Pass,
                 r.final_average ? *r.final_average : std::nan(""), r.certified_bound);
    }
    const double fa = r.final_average ? *r.final_average : std::nan("");
    csv << csv_number(r.lambda) << ',' << csv_number(r.eps) << ',' << csv_number(r.preservation_defect) << ','
        << csv_number(r.retention) << ',' << csv_number(r.identity_defect) << ',' << csv_number(r.certified_bound)
        << ',' << csv_number(fa) << ',' << certificate_status_name(r.status) << '\n';
    scan.push_back({{"lambda", r.lambda},
                    {"eps", r.eps},
                    {"preservation_defect", r.preservation_defect},
                    {"retention", r.retention},
                    {"identity_defect", r.identity_defect},
                    {"certified_bound", r.certified_bound},
                    {"final_average", number_or_null(fa)},
                    {"status", certificate_status_name(r.status)},
                    {"reason", r.reason}});
  }
  timings["scan"] = seconds_since(t0);

  out["scan_function"] = c.functions.front();
  out["scan"] = std::move(scan);
  out["certificates"] = certs.size();
  rep.files.emplace_back("tradeoff.csv", csv.str());
  rep.files.emplace_back("certificate.json", certs.dump(2) + "\n");
  rep.files.emplace_back("pattern.json", pattern_to_json(x).dump() + "\n");
  finish(rep, out, checks, std::move(timings));
  return rep;
}

// ---------------------------------------------------------------------------
// selftest

namespace {

double hermitian_gap(const CMatrix& a) { return (a - a.adjoint()).cwiseAbs().maxCoeff(); }

void selftest_matcore(Checks& checks, Rng& rng) {
  double sqrt_neg = 0.0, sqrt_err = 0.0, inv_err = 0.0, recon_err = 0.0, norm_order = 0.0;
  for (int i = 0; i < 30; ++i) {
    const int n = 2 + i % 3;
    const HermitianMatrix a = random_psd(rng, n, 0.1, 2.0);
    const HermitianMatrix r = psd_sqrt(a);
    sqrt_neg = std::max(sqrt_neg, -lambda_min(r));
    sqrt_err = std::max(sqrt_err, (r.matrix() * r.matrix() - a.matrix()).cwiseAbs().maxCoeff());
    const HermitianMatrix ir = psd_inv_sqrt(a, 0.05);
    inv_err = std::max(inv_err, (ir.matrix() * a.matrix() * ir.matrix() - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff());
    recon_err = std::max(recon_err, (eig_herm(a).reconstruct() - a.matrix()).cwiseAbs().maxCoeff());
    const CMatrix g = random_gaussian(rng, n, n);
    norm_order = std::max(norm_order, op_norm(g) - trace_norm(g));
  }
  checks.add("psd_sqrt is positive", sqrt_neg <= 1e-12, sqrt_neg, 1e-12);
  checks.add("psd_sqrt squares back", sqrt_err <= 1e-10, sqrt_err, 1e-10);
  checks.add("psd_inv_sqrt whitens", inv_err <= 1e-9, inv_err, 1e-9);
  checks.add("eig_herm reconstructs", recon_err <= 1e-12, recon_err, 1e-12);
  checks.add("op_norm <= trace_norm", norm_order <= 1e-12, norm_order, 1e-12);
  const PsdCheck neg = is_psd(HermitianMatrix::diagonal(RVector::LinSpaced(3, -1.0, 1.0)), 1e-12);
  checks.add("is_psd rejects diag(-1, 0, 1)", !neg.psd, neg.lambda_min, -1.0);
}

void selftest_modulus(Checks& checks, Rng& rng) {
  const double s = 0.2, big = 2.0, eps = 0.3;
  const double bound = modulus_inverse_root(s, eps, big);
  int violations = 0, tested = 0;
  double worst = 0.0;
  while (tested < 200) {
    const int n = 2 + tested % 2;
    const HermitianMatrix a = random_psd(rng, n, s, big);
    const CMatrix h = HermitianMatrix::symmetrized(random_gaussian(rng, n, n)).matrix();
    const double t = uniform(rng, 0.0, 1.0) * bound / std::max(op_norm(h), 1e-300);
    const HermitianMatrix b = HermitianMatrix::symmetrized(a.matrix() + t * h);
    const RVector ev = eig_herm(b).eigenvalues;
    if (ev(0) < s || ev(ev.size() - 1) > big) continue;
    ++tested;
    const double lhs = op_norm(psd_inv_sqrt(a, s * 0.5).matrix() - psd_inv_sqrt(b, s * 0.5).matrix());
    worst = std::max(worst, lhs);
    if (lhs > eps / (8.0 * big)) ++violations;
  }
  checks.add("modulus implication violations", violations == 0, worst, eps / (8.0 * big));
}

void selftest_gridalg(Checks& checks, Rng& rng) {
  const Grid grid(16);
  const MatrixFunction a = random_matrix_function(rng, 3, grid);
  const MatrixFunction b = random_matrix_function(rng, 3, grid);
  const double anti = sup_norm(adjoint(multiply(a, b)) - multiply(adjoint(b), adjoint(a)));
  checks.add("(ab)* = b* a*", anti <= 1e-14, anti, 1e-14);
  const double unit = sup_norm(multiply(MatrixFunction::unit(3, grid), a) - a);
  checks.add("unit is neutral", unit == 0.0, unit, 0.0);
  checks.add("a* a is positive", is_pointwise_psd(multiply(adjoint(a), a), 1e-12), 0.0, 0.0);
}

void selftest_blockmap(Checks& checks, Rng& rng) {
  const Grid grid(3);
  double worst_choi = 0.0;
  double worst_amplified = 0.0;
  for (int i = 0; i < 10; ++i) {
    const GridMap s = random_cp_map(rng, 2, grid, 0.6);
    for (const auto& [key, kmat] : s.components()) {
      worst_choi = std::min(worst_choi, lambda_min(HermitianMatrix::symmetrized(component_choi(s, key.first, key.second))));
    }
    for (int probe = 0; probe < 10; ++probe) {
      std::vector<CMatrix> x(grid.size());
      for (auto& v : x) {
        const CMatrix g = random_gaussian(rng, 4, 4);
        v = g * g.adjoint();
      }
      for (const auto& y : amplify_apply(s, x, 2)) {
        worst_amplified = std::min(worst_amplified, lambda_min(HermitianMatrix::symmetrized(y)) / std::max(1.0, op_norm(y)));
      }
    }
  }
  checks.add("Kraus maps have positive Choi", worst_choi >= -1e-12, worst_choi, -1e-12);
  checks.add("Kraus maps are 2-positive", worst_amplified >= -1e-12, worst_amplified, -1e-12);

  GridMap transpose(2, grid);
  CMatrix t = CMatrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) t(a * 2 + b, b * 2 + a) = 1.0;
  for (int k = 0; k < grid.size(); ++k) transpose.set_component(k, k, t);
  const UcpReport tr = verify_ucp(transpose, 1e-9);
  checks.add("transpose is not CP", !tr.is_ucp && std::abs(tr.min_choi_eigenvalue + 1.0) <= 1e-12,
             tr.min_choi_eigenvalue, -1.0);
  const GridMap id = GridMap::identity(2, Grid(4));
  const UcpReport ir = verify_ucp(id, 1e-12);
  checks.add("identity is UCP", ir.is_ucp, ir.unitality_defect, 1e-12);
  const std::size_t rank = numerical_rank(id, 1e-9);
  checks.add("identity rank", rank == 16, static_cast<double>(rank), 16.0);
  const double gap = hermitian_gap(component_choi(id, 0, 0));
  checks.add("identity Choi is Hermitian", gap == 0.0, gap, 0.0);
}

void selftest_states(Checks& checks, Rng& rng) {
  const PatternSet x = balanced_pattern(6, 3);
  const State phi = rudin_state(x);
  checks.add("pattern balanced", pattern_is_balanced(x), 0.0, 0.0);
  checks.add("pattern margin", faithfulness_margin(phi) == 0.0, faithfulness_margin(phi), 0.0);
  const Complex half = eval_state(phi, MatrixFunction::constant(matrix_unit(2, 0, 0), phi.grid()));
  checks.add("phi(e11 (x) 1) = 1/2", half == Complex(0.5, 0.0), std::abs(half - 0.5), 0.0);
  checks.add("pattern state is diagonal", is_diagonal(phi), 0.0, 0.0);
  const State psi = random_piecewise_state(rng, 3, Grid(16), 4, 0.1, 2.0);
  const double unital = std::abs(eval_state(psi, MatrixFunction::unit(3, psi.grid())) - 1.0);
  checks.add("random state is unital", unital <= 1e-12, unital, 1e-12);
  const double e = (cond_exp(psi, MatrixFunction::unit(3, psi.grid())) - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff();
  checks.add("E(1) = 1", e <= 1e-12, e, 1e-12);
  const double proj = preservation_defect(state_projection(psi), psi);
  checks.add("state projection preserves phi", proj <= 1e-12, proj, 1e-12);
}

void selftest_approximator(Checks& checks, Rng& rng, std::uint64_t seed) {
  const State phi = random_piecewise_state(rng, 2, Grid(32), 4, 0.1, 2.0);
  const auto funcs = function_presets({"constant", "linear"}, phi.grid());
  for (double eps : {0.4, 0.2}) {
    ApproximatorOptions opts;
    opts.seed = seed;
    const Approximation a = build_T(phi, funcs, eps, opts);
    const std::string tag = "eps=" + label(eps) + " ";
    const UcpReport ucp = verify_ucp(a.map, 1e-9);
    const double pres = preservation_defect(a.map, phi);
    const auto& d = a.diagnostics;
    checks.add(tag + "T is UCP", ucp.is_ucp, std::max(ucp.unitality_defect, -ucp.min_choi_eigenvalue), 1e-9);
    checks.add(tag + "T preserves phi", pres <= 1e-9, pres, 1e-9);
    checks.add(tag + "probe defect", d.probe_defect <= eps, d.probe_defect, eps);
    checks.add(tag + "matrix defect", d.matrix_defect <= 7.0 * eps / 8.0, d.matrix_defect, 7.0 * eps / 8.0);
    const std::size_t rank = numerical_rank(a.map, 1e-9);
    checks.add(tag + "rank", rank <= d.rank_bound, static_cast<double>(rank), static_cast<double>(d.rank_bound));
  }
}

void selftest_reformulator(Checks& checks, Rng& rng) {
  const State phi = random_piecewise_state(rng, 2, Grid(8), 3, 0.1, 2.0, true);
  const auto funcs = function_presets({"constant"}, phi.grid());
  for (int i = 0; i < 3; ++i) {
    const double t = uniform(rng, 0.0, 1.0);
    const GridMap s = combine(t, build_T(phi, funcs, 0.4).map, 1.0 - t, state_projection(phi));
    const Reformulation r = reformulate(s, phi);
    const auto& d = r.diagnostics;
    const std::string tag = "input " + std::to_string(i) + " ";
    checks.add(tag + "leakage", d.block_leakage <= 1e-12, d.block_leakage, 1e-12);
    checks.add(tag + "unital", d.unitality_defect <= 1e-9, d.unitality_defect, 1e-9);
    checks.add(tag + "completely positive", d.min_choi_eigenvalue >= -1e-9, d.min_choi_eigenvalue, -1e-9);
    checks.add(tag + "preserves phi", d.preservation_defect <= 1e-9, d.preservation_defect, 1e-9);
  }
  const Reformulation id = reformulate(GridMap::identity(2, phi.grid()), phi);
  const GridMap g = id.map.to_grid_map();
  double dev = 0.0;
  for (int k = 0; k < phi.grid().size(); ++k) {
    const CMatrix* kmat = g.component(k, k);
    dev = std::max(dev, kmat ? (*kmat - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() : 1.0);
  }
  const bool diagonal_only = g.components().size() == static_cast<std::size_t>(phi.grid().size());
  checks.add("identity maps to identity", dev == 0.0 && diagonal_only, dev, 0.0);
}

void selftest_obstruction(Checks& checks, std::uint64_t seed) {
  const PatternSet x = balanced_pattern(6, 3);
  const State phi = rudin_state(x);
  ChainOptions opts;
  opts.seed = seed;
  const BlockFormMap s0 = expectation_family_blocks(phi, 3, 0.0);
  const ChainVerifier verifier(s0, phi, x, 0.2, opts);
  for (const char* name : {"constant", "linear"}) {
    const Certificate cert = verifier.verify(function_preset(name, phi.grid()), 32);
    checks.add(std::string("certificate f=") + name, cert.pass, cert.final_average, cert.final_bound);
  }
  std::string tag;
  try {
    const ChainVerifier rejected(BlockFormMap::from_grid_map(GridMap::identity(2, phi.grid())), phi, x, 0.2, opts);
  } catch (const Error& e) {
    tag = e.tag();
  }
  checks.add("identity rejected", tag == "RangeSmoothness", 0.0, 0.0);
  const auto rows = defect_tradeoff_scan(phi, x, 3, {0.0, 0.5}, function_preset("constant", phi.grid()), {0.2}, 32, opts);
  checks.add("lambda=0 certified", rows[0].status == CertificateStatus::Pass, rows[0].retention, 0.0);
  checks.add("lambda=0.5 ineligible", rows[1].status == CertificateStatus::Ineligible && rows[1].retention > 0.0,
             rows[1].preservation_defect, 0.0);
}

}  // namespace

Report run_selftest(const RunConfig& c) {
  Report rep;
  Json out{{"command", "selftest"}, {"config", config_to_json(c)}};
  Json timings = Json::object();
  Checks all;
  Json groups = Json::array();
  Rng rng(c.seed);

  const std::vector<std::pair<std::string, std::function<void(Checks&)>>> suite{
      {"matcore", [&](Checks& k) { selftest_matcore(k, rng); }},
      {"modulus", [&](Checks& k) { selftest_modulus(k, rng); }},
      {"gridalg", [&](Checks& k) { selftest_gridalg(k, rng); }},
      {"blockmap", [&](Checks& k) { selftest_blockmap(k, rng); }},
      {"states", [&](Checks& k) { selftest_states(k, rng); }},
      {"approximator", [&](Checks& k) { selftest_approximator(k, rng, c.seed); }},
      {"reformulator", [&](Checks& k) { selftest_reformulator(k, rng); }},
      {"obstruction", [&](Checks& k) { selftest_obstruction(k, c.seed); }},
  };
  const auto start = Clock::now();
  for (const auto& [name, body] : suite) {
    Checks group;
    const auto t0 = Clock::now();
    try {
      body(group);
    } catch (const Error& e) {
      group.add_error(name, e);
    }
    timings[name] = seconds_since(t0);
    groups.push_back({{"group", name}, {"pass", group.ok()}, {"checks", group.json()}});
    all.add(name, group.ok(), 0.0, 0.0);
  }
  timings["total"] = seconds_since(start);
  out["groups"] = std::move(groups);
  finish(rep, out, all, std::move(timings));
  return rep;
}

// ---------------------------------------------------------------------------

Report run(const RunConfig& c) {
  try {
    if (c.command == "approximate") return run_approximate(c);
    if (c.command == "counterexample") return run_counterexample(c);
    if (c.command == "selftest") return run_selftest(c);
    fail(ErrorCode::Config, "unknown command '" + c.command + "'");
  } catch (const Error& e) {
    Report rep;
    switch (e.code()) {
      case ErrorCode::InvalidArgument:
      case ErrorCode::Dimension:
      case ErrorCode::NotAState:
      case ErrorCode::NotGridFaithful:
      case ErrorCode::PatternScale:
      case ErrorCode::Precondition:
      case ErrorCode::Config:
        rep.exit_code = 2;
        break;
      default:
        rep.exit_code = 1;
    }
    Json out{{"command", c.command}, {"config", config_to_json(c)}, {"error", error_json(e)}, {"pass", false},
             {"exit_code", rep.exit_code}};
    rep.hash = report_hash(out);
    out["hash"] = rep.hash;
    rep.json = std::move(out);
    return rep;
  }
}

Report run(const Json& config) {
  RunConfig c;
  try {
    c = parse_config(config);
  } catch (const Error& e) {
    Report rep;
    rep.exit_code = 2;
    Json out{{"command", config.is_object() && config.contains("command") ? config["command"] : Json(nullptr)},
             {"error", error_json(e)},
             {"pass", false},
             {"exit_code", 2}};
    rep.hash = report_hash(out);
    out["hash"] = rep.hash;
    rep.json = std::move(out);
    return rep;
  }
  return run(c);
}

}  // namespace cpapprox
