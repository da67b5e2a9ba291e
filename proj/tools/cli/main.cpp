#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "ellipdiff/error.hpp"

using namespace ellipdiff;
using namespace ellipdiff::cli;

namespace {

// Build-tree scenarios first, then <prefix>/share next to an installed binary.
std::string stock_scenario() {
  namespace fs = std::filesystem;
  const fs::path built = fs::path(ELLIPDIFF_SCENARIO_DIR) / "stock.json";
  if (fs::exists(built)) return built.string();
  std::error_code ec;
  const fs::path exe = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const fs::path installed = exe.parent_path().parent_path() / "share/ellipdiff/scenarios/stock.json";
    if (fs::exists(installed)) return installed.string();
  }
  return built.string();
}

struct Args {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string lattice;
  std::optional<int> p, q, order, samples;
  std::optional<double> tol;
  bool allow_mult_indep = false;
  bool emit_table = false;
  bool self_test = false;
};

// Subcommand -> module suite run by --self-test.
const char* module_of(const std::string& sub) {
  if (sub == "build") return "canonical";
  if (sub == "check-consistency") return "diffmod";
  if (sub == "reduce") return "formal";
  if (sub == "continue") return "continuation";
  if (sub == "classify") return "canonical";
  if (sub == "periodicity-demo") return "periodicity";
  if (sub == "descent") return "descent";
  return "all";
}

RunConfig resolve_config(const Args& a) {
  RunConfig cfg;
  if (!a.config_path.empty()) apply_config_json(cfg, read_json_file(a.config_path));
  if (const char* env = std::getenv("ELLIPDIFF_SEED")) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*env == '\0' || *end != '\0' || errno != 0 || *env == '-') throw UsageError("ELLIPDIFF_SEED must be an unsigned integer");
    cfg.seed = v;
  }
  if (a.seed) cfg.seed = *a.seed;
  if (!a.lattice.empty()) cfg.lattice = a.lattice;
  if (a.p) cfg.p = *a.p;
  if (a.q) cfg.q = *a.q;
  if (a.order) cfg.order = *a.order;
  if (a.samples) cfg.samples = *a.samples;
  if (a.tol) cfg.consistency_tol = *a.tol;
  if (a.allow_mult_indep) cfg.allow_mult_indep = true;
  if (cfg.p < 2 || cfg.q < 2) throw UsageError("p and q must be integers >= 2");
  return cfg;
}

void add_common(CLI::App* sub, Args& a) {
  sub->add_flag("--self-test", a.self_test, "Run this module's invariant suite");
  sub->add_option("-o,--output", a.output, "Write JSON to FILE instead of stdout");
  sub->add_option("--lattice", a.lattice, "square | hexagonal | generic | w1re,w1im,w2re,w2im");
  sub->add_option("--p", a.p, "Integer p >= 2");
  sub->add_option("--q", a.q, "Integer q >= 2");
  sub->add_option("--order", a.order, "Truncation order N");
  sub->add_option("--seed", a.seed, "RNG seed (overrides ELLIPDIFF_SEED and the config)");
  sub->add_option("--config", a.config_path, "RunConfig JSON");
  sub->add_flag("--allow-mult-indep", a.allow_mult_indep, "Accept multiplicatively independent, non-coprime p, q");
}

int emit(const Outcome& o, const std::string& path) {
  const std::string text = o.doc.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out << text;
  }
  return o.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Workbench for elliptic (p,q)-difference modules"};
  app.require_subcommand(0, 1);
  Args a;
  app.add_flag("--emit-table", a.emit_table, "Print the rank <= 3 classification table");
  app.add_flag("--self-test", a.self_test, "Run every invariant suite");
  app.add_option("--seed", a.seed, "RNG seed");
  app.add_option("--config", a.config_path, "RunConfig JSON");
  app.add_option("-o,--output", a.output, "Write JSON to FILE instead of stdout");

  BuildArgs build;
  auto* sb = app.add_subcommand("build", "Build a difference pair and check its consistency");
  add_common(sb, a);
  sb->add_option("kind", build.kind, "special | typed")->check(CLI::IsMember({"special", "typed"}));
  sb->add_option("input", build.input, "Block-scalar JSON for 'typed'");
  sb->add_option("--rank", build.rank, "Rank of the special pair");
  sb->add_option("--z0", build.z0, "Base point z0 of U, re,im");

  std::string pair_path;
  auto* sc = app.add_subcommand("check-consistency", "Check B(z/p)A(z) = A(z/q)B(z)");
  add_common(sc, a);
  sc->add_option("pair", pair_path, "Pair JSON");
  sc->add_option("--samples", a.samples, "Sample points");
  sc->add_option("--tol", a.tol, "Consistency tolerance");

  auto* sr = app.add_subcommand("reduce", "Formal reduction to constant matrices");
  add_common(sr, a);
  sr->add_option("pair", pair_path, "Pair JSON");

  ContinueArgs cont;
  auto* sn = app.add_subcommand("continue", "Continue the normalized gauge to a point");
  add_common(sn, a);
  sn->add_option("pair", cont.pair_path, "Pair JSON");
  sn->add_option("--at", cont.at, "Target point re,im");
  sn->add_option("--route", cont.route, "p | q");
  sn->add_option("--probe", cont.probe, "Constancy probe points (0 disables)");
  sn->add_option("--probe-tol", cont.probe_tol, "Constancy tolerance");

  std::string ts_path;
  auto* sk = app.add_subcommand("classify", "Classify a rank <= 3 block-scalar pair");
  add_common(sk, a);
  sk->add_option("ts", ts_path, "Block-scalar JSON {T, S, layout}");
  sk->add_flag("--emit-table", a.emit_table, "Print the classification table");

  PeriodicityArgs per;
  auto* sp = app.add_subcommand("periodicity-demo", "Run the periodicity checker on a divisor scenario");
  add_common(sp, a);
  sp->add_option("scenario", per.scenario_path, "Scenario JSON");
  sp->add_flag("--emit-section", per.emit_section, "Include the modified section s'");
  sp->add_option("--closure", per.closure_n, "Also test the closure of ~_S and ~_T mod N");
  sp->add_option("--box", per.closure_box, "Closure box bound");
  sp->add_option("--slack", per.closure_slack, "Closure slack bound");

  auto* sd = app.add_subcommand("descent", "Laurent-polynomial descent tools");
  add_common(sd, a);
  DescentSolveArgs dsolve;
  auto* sds = sd->add_subcommand("solve", "Solve h(z/p) = t h(z) + g(z)");
  sds->add_option("--t", dsolve.t, "t as re,im (num/den,num/den with --exact)");
  sds->add_option("--g", dsolve.g_path, "Laurent polynomial JSON {\"terms\": [[n, coeff], ...]}");
  sds->add_flag("--exact", dsolve.exact, "Exact Gaussian-rational arithmetic");
  sds->add_option("--p", a.p, "Integer p >= 2");
  sds->add_option("-o,--output", a.output, "Write JSON to FILE instead of stdout");
  std::string element = "zeta";
  auto* sdm = sd->add_subcommand("membership", "Witnesses that an element lies in R = K[z, 1/z, zeta]");
  sdm->add_option("--element", element, "z | zeta | composite");
  sdm->add_option("--lattice", a.lattice, "Lattice");
  sdm->add_option("--p", a.p, "Integer p >= 2");
  sdm->add_option("--q", a.q, "Integer q >= 2");
  sdm->add_option("-o,--output", a.output, "Write JSON to FILE instead of stdout");

  std::string module = "all";
  auto* st = app.add_subcommand("self-test", "Run the invariant suites");
  add_common(st, a);
  st->add_option("--module", module, "all | weierstrass | expr | diffmod | canonical | formal | continuation | periodicity | descent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const RunConfig cfg = resolve_config(a);
    const auto subs = app.get_subcommands();
    const std::string sub = subs.empty() ? "" : subs.front()->get_name();
    auto need = [](const std::string& v, const char* what) {
      if (v.empty()) throw UsageError(std::string("missing ") + what);
    };
    if (a.self_test) return emit(cmd_self_test(cfg, module_of(sub)), a.output);
    if (a.emit_table && (sub.empty() || sub == "classify")) return emit(emit_table(cfg), a.output);
    if (sub.empty()) {
      std::cerr << app.help();
      return 2;
    }
    if (sub == "build") return emit(cmd_build(cfg, build), a.output);
    if (sub == "check-consistency") {
      need(pair_path, "pair JSON");
      return emit(cmd_check_consistency(cfg, pair_path), a.output);
    }
    if (sub == "reduce") {
      need(pair_path, "pair JSON");
      return emit(cmd_reduce(cfg, pair_path), a.output);
    }
    if (sub == "continue") {
      need(cont.pair_path, "pair JSON");
      return emit(cmd_continue(cfg, cont), a.output);
    }
    if (sub == "classify") {
      need(ts_path, "block-scalar JSON");
      return emit(cmd_classify(cfg, ts_path), a.output);
    }
    if (sub == "periodicity-demo") {
      if (per.scenario_path.empty()) per.scenario_path = stock_scenario();
      return emit(cmd_periodicity_demo(cfg, per), a.output);
    }
    if (sub == "descent") {
      if (sds->parsed()) return emit(cmd_descent_solve(cfg, dsolve), a.output);
      if (sdm->parsed()) return emit(cmd_descent_membership(cfg, element), a.output);
      throw UsageError("descent needs 'solve' or 'membership'");
    }
    if (sub == "self-test") return emit(cmd_self_test(cfg, module), a.output);
    throw UsageError("unknown subcommand");
  } catch (const UsageError& e) {
    std::cerr << "ellipdiff: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "ellipdiff: " << e.what() << "\n";
    if (e.code() == Errc::Schema) return 2;
    const nlohmann::json doc = {{"error", errc_name(e.code())}, {"message", e.what()}};
    std::cout << doc.dump(2) << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "ellipdiff: schema: " << e.what() << "\n";
    return 2;
  }
}
