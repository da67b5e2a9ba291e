#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>

#include "selftest.hpp"

namespace st = ellipdiff::selftest;

namespace {

std::string capture(const std::string& cmd) {
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) return {};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe.get())) > 0) out.append(buf, n);
  return out;
}

void line(int k, bool pass, const std::string& what, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << k << ": " << what;
  if (!detail.empty()) std::cout << "  [" << detail << "]";
  std::cout << "\n";
}

}  // namespace

int main() {
  const std::uint64_t seed = 1;
  bool all = true;

  auto t0 = std::chrono::steady_clock::now();
  auto suites = st::run_all(seed);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  int k = 1;
  for (const auto& s : suites) {
    std::string detail = std::to_string(s.checks.size()) + " checks";
    if (const auto* w = s.worst()) {
      char buf[256];
      std::snprintf(buf, sizeof buf, ", worst %.3g / %.1g (%s)", w->value, w->tol, w->name.c_str());
      detail += buf;
    }
    if (!s.pass()) {
      for (const auto& c : s.checks)
        if (!c.pass) std::cout << "      failed: " << c.name << " value=" << c.value << " tol=" << c.tol << "\n";
    }
    line(k++, s.pass(), s.title, detail);
    all = all && s.pass();
  }

  // In-process reproducibility, then the same through the CLI.
  std::string a = st::report_json(suites, seed).dump(2);
  std::string b = st::report_json(st::run_all(seed), seed).dump(2);
  bool same_lib = (a == b);

  std::string cmd = std::string("ELLIPDIFF_SEED=") + std::to_string(seed) + " '" + ELLIPDIFF_CLI_PATH +
                    "' self-test 2>/dev/null";
  std::string c1 = capture(cmd);
  std::string c2 = capture(cmd);
  bool same_cli = !c1.empty() && c1 == c2 && c1.find("\"pass\": true") != std::string::npos;
  bool cli_matches_lib = false;
  try {
    auto parsed = nlohmann::json::parse(c1);
    cli_matches_lib = parsed.at("suites") == st::report_json(suites, seed).at("suites");
  } catch (const std::exception&) {
  }

  char det[192];
  std::snprintf(det, sizeof det, "library %s, cli %s%s, %zu bytes, suite time %.2fs",
                same_lib ? "identical" : "differs", same_cli ? "identical" : "differs",
                cli_matches_lib ? " and equal to library" : " but not equal to library", c1.size(), secs);
  bool det_ok = same_lib && same_cli && cli_matches_lib;
  line(9, det_ok, "self-test output byte-identical under a fixed seed", det);
  all = all && det_ok;

  std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << "\n";
  return all ? 0 : 1;
}
