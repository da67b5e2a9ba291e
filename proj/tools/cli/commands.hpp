#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ellipdiff/weierstrass.hpp"

namespace ellipdiff::cli {

// Raised for bad arguments; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string lattice = "square";
  int p = 2, q = 3;
  int order = 40;
  double consistency_tol = 1e-8;
  double series_tol = 1e-9;
  double spatial_tol = 1e-9;
  int samples = 20;
  std::uint64_t seed = 1;
  bool allow_mult_indep = false;
};

// Fields present in the JSON override the defaults.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);

LatticePtr lattice_from_spec(const std::string& spec);
cplx parse_complex(const std::string& s);
nlohmann::json read_json_file(const std::string& path);

struct Outcome {
  nlohmann::json doc;
  int exit_code = 0;
};

struct BuildArgs {
  std::string kind = "special";
  std::string input;
  int rank = 2;
  std::string z0 = "0,0";
};
Outcome cmd_build(const RunConfig& cfg, const BuildArgs& a);

Outcome cmd_check_consistency(const RunConfig& cfg, const std::string& pair_path);

Outcome cmd_reduce(const RunConfig& cfg, const std::string& pair_path);

struct ContinueArgs {
  std::string pair_path;
  std::string at = "1,0";
  std::string route = "p";
  int probe = 20;
  double probe_tol = 1e-7;
};
Outcome cmd_continue(const RunConfig& cfg, const ContinueArgs& a);

Outcome cmd_classify(const RunConfig& cfg, const std::string& ts_path);
Outcome emit_table(const RunConfig& cfg);

struct PeriodicityArgs {
  std::string scenario_path;
  bool emit_section = false;
  std::optional<int> closure_n;
  int closure_box = 30;
  int closure_slack = 10000;
};
Outcome cmd_periodicity_demo(const RunConfig& cfg, const PeriodicityArgs& a);

struct DescentSolveArgs {
  std::string t = "3,0";
  std::string g_path;
  bool exact = false;
};
Outcome cmd_descent_solve(const RunConfig& cfg, const DescentSolveArgs& a);
Outcome cmd_descent_membership(const RunConfig& cfg, const std::string& element);

Outcome cmd_self_test(const RunConfig& cfg, const std::string& module);

}  // namespace ellipdiff::cli
