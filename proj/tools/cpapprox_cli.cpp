/*
 * Copyright 2026 The cpapprox Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
// cpapprox command line front-end. Builds a JSON config from the flags (on
// top of --config when given), runs it through the C API, prints the report
// and writes the output files into --out.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cpapprox/cpapprox.h"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::vector<double> eps;
  std::optional<int> level;
  std::optional<int> smooth_level;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> tol;
  std::string state_path;
  bool quiet = false;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

json build_config(const std::string& command, const Options& o) {
  json config = o.config_path.empty() ? json::object() : read_json_file(o.config_path);
  if (!config.is_object()) throw std::runtime_error("config file must hold a JSON object");
  config["command"] = command;
  if (!o.eps.empty()) config["eps"] = o.eps;
  if (o.level) config["level"] = *o.level;
  if (o.smooth_level) config["smooth_level"] = *o.smooth_level;
  if (o.seed) config["seed"] = *o.seed;
  if (!o.state_path.empty()) config["state"] = {{"generator", "inline"}, {"data", read_json_file(o.state_path)}};
  if (config.contains("state") && config["state"].is_object() && config["state"].value("generator", "") == "file") {
    const std::string path = config["state"].value("path", "");
    config["state"] = {{"generator", "inline"}, {"data", read_json_file(path)}};
  }
  for (const auto& assignment : o.tol) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--tol expects NAME=VALUE, got " + assignment);
    std::size_t used = 0;
    const std::string value = assignment.substr(eq + 1);
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw std::runtime_error("--tol value is not a number: " + assignment);
    config["tol"][assignment.substr(0, eq)] = v;
  }
  return config;
}

void write_outputs(const cpa_report* report, const std::string& report_text, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& contents) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    out << contents;
  };
  write("report.json", report_text + "\n");
  for (std::size_t i = 0; i < cpa_report_file_count(report); ++i) {
    write(cpa_report_file_name(report, i), cpa_report_file_contents(report, i));
  }
}

int run_command(const std::string& command, const Options& o) {
  json config;
  try {
    config = build_config(command, o);
  } catch (const std::exception& e) {
    std::cerr << "cpapprox: " << e.what() << "\n";
    return kExitConfig;
  }
  cpa_report* report = nullptr;
  const cpa_status status = cpa_run(config.dump().c_str(), &report);
  if (status != CPA_OK) {
    std::cerr << "cpapprox: " << cpa_status_name(status) << ": " << cpa_last_error() << "\n";
    return kExitConfig;
  }
  char* text = nullptr;
  cpa_report_json(report, &text);
  const std::string report_text = text ? text : "{}";
  cpa_string_free(text);
  const int code = cpa_report_exit_code(report);
  if (!o.quiet) std::cout << report_text << "\n";
  if (!o.out_dir.empty()) {
    try {
      write_outputs(report, report_text, o.out_dir);
    } catch (const std::exception& e) {
      std::cerr << "cpapprox: " << e.what() << "\n";
      cpa_report_free(report);
      return kExitConfig;
    }
  }
  std::cerr << command << ": " << (code == 0 ? "pass" : code == 1 ? "FAIL" : "error") << " (exit " << code
            << ", hash " << cpa_report_hash(report) << ")\n";
  cpa_report_free(report);
  return code;
}

void add_common_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  cmd->add_option("--out", o.out_dir, "directory for report.json and CSV outputs");
  cmd->add_option("--eps", o.eps, "accuracy, repeatable (replaces the configured ladder)")->take_all();
  cmd->add_option("--level", o.level, "pattern level L");
  cmd->add_option("--smooth-level", o.smooth_level, "balance level L0");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--tol", o.tol, "tolerance override NAME=VALUE (ucp, preservation, chain)");
  cmd->add_option("--state", o.state_path, "state file (JSON: n, m, mu, g)");
  cmd->add_flag("--quiet", o.quiet, "do not print the report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cpapprox: approximation maps and obstruction certificates for states on M_n (x) C(X)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cpa_version()));
  Options o;
  for (const char* name : {"approximate", "counterexample", "selftest"}) {
    add_common_flags(app.add_subcommand(name), o);
  }
  app.get_subcommand("approximate")->description("build T over the eps ladder and check every guarantee");
  app.get_subcommand("counterexample")->description("certificates and trade-off scan for the alternating-pattern state");
  app.get_subcommand("selftest")->description("reduced-size property suite");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  return run_command(app.get_subcommands().front()->get_name(), o);
}
