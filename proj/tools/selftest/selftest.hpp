#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ellipdiff::selftest {

struct Check {
  std::string name;
  double value = 0;
  double tol = 0;
  bool pass = false;
};

struct SuiteResult {
  std::string id;
  std::string title;
  std::vector<Check> checks;
  bool pass() const;
  // Worst check, for one-line summaries.
  const Check* worst() const;
  nlohmann::json json() const;
};

SuiteResult weierstrass_suite(std::uint64_t seed);
SuiteResult g_identities_suite(std::uint64_t seed);
SuiteResult special_pair_suite(std::uint64_t seed);
SuiteResult formal_suite(std::uint64_t seed);
SuiteResult continuation_suite(std::uint64_t seed);
SuiteResult classification_suite(std::uint64_t seed);
SuiteResult periodicity_suite(std::uint64_t seed);
SuiteResult descent_suite(std::uint64_t seed);

// Suites in criterion order 1..8.
std::vector<SuiteResult> run_all(std::uint64_t seed);
// weierstrass, expr, diffmod, canonical, formal, continuation, periodicity, descent
std::vector<SuiteResult> run_module(const std::string& module, std::uint64_t seed);
const std::vector<std::string>& modules();

nlohmann::json report_json(const std::vector<SuiteResult>& suites, std::uint64_t seed);

}  // namespace ellipdiff::selftest
