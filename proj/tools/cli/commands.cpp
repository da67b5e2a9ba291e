#include "commands.hpp"

#include <fstream>
#include <sstream>

#include "ellipdiff/canonical.hpp"
#include "ellipdiff/continuation.hpp"
#include "ellipdiff/descent.hpp"
#include "ellipdiff/formal.hpp"
#include "ellipdiff/json_io.hpp"
#include "ellipdiff/periodicity.hpp"
#include "selftest.hpp"

namespace ellipdiff::cli {

using nlohmann::json;

namespace {

PairOptions pair_options(const RunConfig& cfg) { return PairOptions{cfg.allow_mult_indep}; }

json consistency_json(const ConsistencyReport& r) {
  return {{"max_residual", r.max_residual}, {"series_residual", r.series_residual}, {"series_checked", r.series_checked},
          {"series_order", r.series_order}, {"samples", r.samples},                 {"retries", r.retries},
          {"pass", r.pass}};
}

ConsistencyConfig consistency_config(const RunConfig& cfg) {
  ConsistencyConfig c;
  c.n_samples = cfg.samples;
  c.tol = cfg.consistency_tol;
  c.seed = cfg.seed;
  return c;
}

// A pair file may carry the block-scalar data it was built from.
struct LoadedPair {
  DifferencePair pair;
  std::optional<BlockScalarPair> typed;
  cplx z0 = 0;
};

LoadedPair load_pair(const RunConfig& cfg, const std::string& path) {
  const json j = read_json_file(path);
  PairOptions opts = pair_options(cfg);
  if (j.is_object() && j.value("untrusted", false)) opts.allow_mult_indep = true;
  LoadedPair lp{pair_from_json(j, opts), std::nullopt, 0};
  if (j.is_object() && j.contains("construction")) {
    const json& c = j["construction"];
    if (!c.is_object() || !c.contains("z0")) fail(Errc::Schema, "construction needs z0");
    lp.z0 = complex_from_json(c["z0"]);
    lp.typed = block_scalar_from_json(c);
  }
  return lp;
}

}  // namespace

void apply_config_json(RunConfig& cfg, const json& j) {
  if (!j.is_object()) fail(Errc::Schema, "config must be a JSON object");
  try {
    if (j.contains("lattice")) {
      if (j["lattice"].is_string()) cfg.lattice = j["lattice"].get<std::string>();
      else cfg.lattice = j["lattice"].dump();
    }
    cfg.p = j.value("p", cfg.p);
    cfg.q = j.value("q", cfg.q);
    cfg.order = j.value("order", cfg.order);
    cfg.samples = j.value("samples", cfg.samples);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.allow_mult_indep = j.value("allow_mult_indep", cfg.allow_mult_indep);
    if (j.contains("tolerances")) {
      const json& t = j["tolerances"];
      cfg.consistency_tol = t.value("consistency", cfg.consistency_tol);
      cfg.series_tol = t.value("series", cfg.series_tol);
      cfg.spatial_tol = t.value("spatial", cfg.spatial_tol);
    }
  } catch (const json::exception& e) {
    fail(Errc::Schema, std::string("config: ") + e.what());
  }
  if (cfg.order < 1 || cfg.samples < 1) fail(Errc::Schema, "order and samples must be positive");
}

LatticePtr lattice_from_spec(const std::string& spec) {
  if (spec == "square") return make_lattice_ptr(1.0, cplx(0, 1));
  if (spec == "hexagonal") return make_lattice_ptr(1.0, std::polar(1.0, kPi / 3));
  if (spec == "generic") return make_lattice_ptr(1.0, cplx(0.3, 1.1));
  if (!spec.empty() && spec.front() == '{') return lattice_from_json(json::parse(spec));
  std::vector<double> v;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw UsageError("bad lattice '" + spec + "': use square, hexagonal, generic or w1re,w1im,w2re,w2im");
    }
  }
  if (v.size() != 4) throw UsageError("bad lattice '" + spec + "': use square, hexagonal, generic or w1re,w1im,w2re,w2im");
  return make_lattice_ptr(cplx(v[0], v[1]), cplx(v[2], v[3]));
}

cplx parse_complex(const std::string& s) {
  const auto comma = s.find(',');
  try {
    std::size_t used = 0;
    if (comma == std::string::npos) {
      const double re = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return re;
    }
    const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
    const double re = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(s);
    const double im = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(s);
    return {re, im};
  } catch (const std::exception&) {
    throw UsageError("expected a complex number re,im but got '" + s + "'");
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(Errc::Schema, path + ": " + e.what());
  }
}

Outcome cmd_build(const RunConfig& cfg, const BuildArgs& a) {
  const LatticePtr L = lattice_from_spec(cfg.lattice);
  const cplx z0 = parse_complex(a.z0);
  BlockScalarPair bs;
  std::optional<DifferencePair> P;
  if (a.kind == "special") {
    if (a.rank < 1 || a.rank > 12) throw UsageError("--rank must be between 1 and 12");
    bs = {special_diagonal(a.rank, cfg.p), special_diagonal(a.rank, cfg.q), {a.rank}};
    P.emplace(special_pair(a.rank, cfg.p, cfg.q, L, z0, pair_options(cfg)));
  } else if (a.kind == "typed") {
    if (a.input.empty()) throw UsageError("build typed needs a block-scalar JSON file");
    bs = block_scalar_from_json(read_json_file(a.input));
    P.emplace(typed_pair(bs, cfg.p, cfg.q, L, z0));
  } else {
    throw UsageError("build kind must be 'special' or 'typed'");
  }
  const auto rep = check_consistency(*P, consistency_config(cfg));
  json doc = pair_to_json(*P);
  json c = block_scalar_to_json(bs);
  c["kind"] = a.kind;
  c["z0"] = complex_json(z0);
  doc["construction"] = c;
  doc["consistency"] = consistency_json(rep);
  return {doc, rep.pass ? 0 : 1};
}

Outcome cmd_check_consistency(const RunConfig& cfg, const std::string& pair_path) {
  const LoadedPair lp = load_pair(cfg, pair_path);
  const auto rep = check_consistency(lp.pair, consistency_config(cfg));
  json doc = consistency_json(rep);
  doc["rank"] = lp.pair.rank();
  doc["p"] = lp.pair.p();
  doc["q"] = lp.pair.q();
  doc["trusted"] = lp.pair.trusted();
  return {doc, rep.pass ? 0 : 1};
}

Outcome cmd_reduce(const RunConfig& cfg, const std::string& pair_path) {
  const LoadedPair lp = load_pair(cfg, pair_path);
  const FormalReduction f = reduce_pair(lp.pair, cfg.order);
  json doc = reduction_json(f);
  const bool pass = f.relation_residual < cfg.series_tol && f.commutator < cfg.series_tol && f.b0_residual < cfg.series_tol;
  doc["pass"] = pass;
  return {doc, pass ? 0 : 1};
}

Outcome cmd_continue(const RunConfig& cfg, const ContinueArgs& a) {
  const LoadedPair lp = load_pair(cfg, a.pair_path);
  const cplx z = parse_complex(a.at);
  if (a.route != "p" && a.route != "q") throw UsageError("--route must be p or q");
  ContinuedGauge g;
  std::string method;
  if (lp.typed && std::abs(lp.z0) > 0) {
    g = gauge_from_typed(*lp.typed, lp.pair, lp.z0, cfg.order);
    method = "typed";
  } else {
    g = gauge_from_formal(lp.pair, cfg.order);
    method = "formal";
  }
  const Matrix C = continue_gauge(g, z, a.route == "p" ? Route::p : Route::q);
  json doc;
  doc["z"] = complex_json(z);
  doc["route"] = a.route;
  doc["gauge_source"] = method;
  doc["C"] = matrix_json(C);
  doc["A0"] = matrix_json(g.A0);
  if (g.has_q_side) doc["B0"] = matrix_json(g.B0);
  doc["radius"] = radius_json(g.estimate);
  bool pass = true;
  if (a.probe > 0) {
    const auto rep = constancy_probe(lp.pair, g, a.probe, a.probe_tol, cfg.seed);
    doc["constancy"] = {{"max_a_residual", rep.max_a_residual}, {"max_b_residual", rep.max_b_residual},
                        {"points", rep.points},                 {"skipped", rep.skipped},
                        {"tol", a.probe_tol},                   {"pass", rep.pass}};
    pass = rep.pass;
  }
  return {doc, pass ? 0 : 1};
}

Outcome cmd_classify(const RunConfig& cfg, const std::string& ts_path) {
  const json j = read_json_file(ts_path);
  const BlockScalarPair bs = block_scalar_from_json(j);
  int p = cfg.p, q = cfg.q;
  if (j.contains("p")) p = j["p"].get<int>();
  if (j.contains("q")) q = j["q"].get<int>();
  json doc = classification_json(classify_rank_le3(bs, p, q));
  doc["p"] = p;
  doc["q"] = q;
  return {doc, 0};
}

Outcome emit_table(const RunConfig& cfg) {
  const int p = cfg.p, q = cfg.q;
  auto m3 = [](std::initializer_list<cplx> v) {
    Matrix m(3, 3);
    auto it = v.begin();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = *it++;
    return m;
  };
  const double P = p, Q = q;
  struct Row {
    const char* klass;
    const char* description;
    BlockScalarPair bs;
  };
  Matrix T1 = Matrix::Zero(3, 3), S1 = Matrix::Zero(3, 3);
  T1.diagonal() << 1.0, 2.0, 5.0;
  S1.diagonal() << 1.0, 7.0, 3.0;
  const std::vector<Row> rows = {
      {"i", "type (1,1,1): commuting pair of scalar matrices (A0, B0)", {T1, S1, {1, 1, 1}}},
      {"ii", "type (2,1): M2sp(a,b) + M1(a',b')", {m3({1, 0, 0, 0, P, 0, 0, 0, 5}), m3({1, 0, 0, 0, Q, 0, 0, 0, 7}), {2, 1}}},
      {"iii", "type (2,1): non-split extension of M1(a,b) by M2sp(a,b), family over P^1",
       {m3({1, 0, 2, 0, P, 0, 0, 0, 1}), m3({1, 0, 1, 0, Q, 0, 0, 0, 1}), {2, 1}}},
      {"iv", "type (2,1): non-split extension of M2sp(a,b) by M1(pa,qb), family over P^1",
       {m3({1, 0, 0, 0, P, 0, 0, 1, P}), m3({1, 0, 0, 0, Q, 0, 0, 3, Q}), {2, 1}}},
      {"v", "type (3): M3sp(a,b)", {special_diagonal(3, p), special_diagonal(3, q), {3}}},
  };
  json table = json::array();
  bool pass = true;
  for (const auto& r : rows) {
    const Classification c = classify_rank_le3(r.bs, p, q);
    pass = pass && c.klass == r.klass;
    table.push_back({{"class", r.klass},
                     {"description", r.description},
                     {"type", c.type.label()},
                     {"example", block_scalar_to_json(r.bs)},
                     {"classified", classification_json(c)}});
  }
  return {{{"p", p}, {"q", q}, {"table", table}}, pass ? 0 : 1};
}

Outcome cmd_periodicity_demo(const RunConfig& cfg, const PeriodicityArgs& a) {
  const json j = read_json_file(a.scenario_path);
  if (!j.is_object()) fail(Errc::Schema, "scenario must be a JSON object");
  for (const char* k : {"p", "q", "lattice", "window"})
    if (!j.contains(k)) fail(Errc::Schema, std::string("scenario is missing '") + k + "'");
  const int p = j["p"].get<int>(), q = j["q"].get<int>();
  const LatticePtr L = lattice_from_json(j["lattice"]);
  const Window w = window_from_json(j["window"]);
  Scenario sc{DivisorSection(w), DivisorSection(w), DivisorSection(w), p, q, L};
  if (j.contains("synthesize")) {
    const json& s = j["synthesize"];
    std::vector<std::pair<cplx, long>> bases;
    for (const auto& [x, m] : divisor_from_json(s.at("bases"), w).support()) bases.emplace_back(x, m);
    sc = synthesize_scenario(L, p, q, bases, s.value("lattice_mult", 0L), s.value("origin_value", 0L), w);
  } else {
    for (const char* k : {"divA", "divB"})
      if (!j.contains(k)) fail(Errc::Schema, std::string("scenario is missing '") + k + "'");
    sc.divA = divisor_from_json(j["divA"], w);
    sc.divB = divisor_from_json(j["divB"], w);
    // Without an explicit s, solve the p-cocycle by recursion.
    sc.s = j.contains("s") ? divisor_from_json(j["s"], w)
                           : section_from_recursion(sc.divA, p, j.value("origin_value", 0L));
  }
  if (j.contains("corrupt")) {
    const std::string name = j["corrupt"].get<std::string>();
    bool found = false;
    for (auto& [n, v] : corrupted_variants(sc))
      if (n == name) {
        sc = v;
        found = true;
      }
    if (!found) fail(Errc::Schema, "unknown corruption '" + name + "'");
  }
  json doc;
  doc["p"] = p;
  doc["q"] = q;
  doc["support"] = {{"s", sc.s.size()}, {"divA", sc.divA.size()}, {"divB", sc.divB.size()}};
  int code = 0;
  try {
    const auto r = periodic_after_modification(sc.s, sc.divA, sc.divB, p, q, *L);
    doc["verdict"] = r.periodic ? "periodic" : "not periodic";
    doc["periodic"] = r.periodic;
    doc["reference_period"] = complex_json(r.reference_period);
    doc["origin"] = {{"before", r.old_origin}, {"after", r.new_origin}};
    doc["translation_checks"] = {{"comparisons", r.check.comparisons}, {"mismatches", r.check.mismatches}};
    doc["cocycle_after_modification"] = {{"p", cocycle_check(r.s_prime, sc.divA, p).pass},
                                         {"q", cocycle_check(r.s_prime, sc.divB, q).pass}};
    if (a.emit_section) doc["s_prime"] = divisor_json(r.s_prime);
    code = r.periodic ? 0 : 1;
  } catch (const Error& e) {
    if (e.code() != Errc::HypothesisViolated) throw;
    doc["verdict"] = "rejected";
    doc["periodic"] = false;
    doc["reason"] = e.what();
    code = 1;
  }
  if (a.closure_n) {
    const auto v = closure_equals_modN(p, q, *a.closure_n, 1, a.closure_box, a.closure_slack);
    doc["closure"] = {{"N", *a.closure_n},          {"box", a.closure_box},
                      {"slack", a.closure_slack},   {"equals_mod_n", v.equals_mod_n},
                      {"components", v.components}, {"disconnected_pairs", v.disconnected_pairs}};
  }
  (void)cfg;
  return {doc, code};
}

namespace {

GaussianRational parse_exact_complex(const std::string& s) {
  const auto comma = s.find(',');
  try {
    if (comma == std::string::npos) return gaussian_from_json(json(s));
    return gaussian_from_json(json::array({s.substr(0, comma), s.substr(comma + 1)}));
  } catch (const Error&) {
    throw UsageError("expected an exact complex number num/den,num/den but got '" + s + "'");
  }
}

}  // namespace

Outcome cmd_descent_solve(const RunConfig& cfg, const DescentSolveArgs& a) {
  if (a.g_path.empty()) throw UsageError("descent solve needs --g FILE");
  const json gj = read_json_file(a.g_path);
  json doc;
  doc["p"] = cfg.p;
  bool residual_zero = false;
  auto fill = [&](const auto& sol, json h, json res) {
    doc["h"] = std::move(h);
    doc["obstructed"] = sol.obstructed;
    if (sol.obstructed) doc["obstruction_exponent"] = sol.obstruction_exponent;
    doc["free_exponent"] = sol.free_exponent ? json(*sol.free_exponent) : json(nullptr);
    doc["residual"] = std::move(res);
  };
  if (a.exact) {
    const GaussianRational t = parse_exact_complex(a.t);
    const ExactLaurentPoly g = exact_laurent_from_json(gj);
    const auto sol = solve_scaling_equation(t, g, cfg.p);
    const auto res = scaling_residual(sol.h, t, g, cfg.p);
    residual_zero = sol.obstructed || res.is_zero();
    fill(sol, exact_laurent_json(sol.h), exact_laurent_json(res));
    doc["t"] = gaussian_json(t);
    doc["arithmetic"] = "exact";
  } else {
    const cplx t = parse_complex(a.t);
    const LaurentPoly g = laurent_from_json(gj);
    const auto sol = solve_scaling_equation(t, g, cfg.p);
    const auto res = scaling_residual(sol.h, t, g, cfg.p);
    double worst = 0, scale = 1;
    for (const auto& [n, c] : g.terms()) scale = std::max(scale, std::abs(c));
    for (const auto& [n, c] : res.terms()) worst = std::max(worst, std::abs(c));
    residual_zero = sol.obstructed || worst <= 1e-12 * scale;
    fill(sol, laurent_json(sol.h), laurent_json(res));
    doc["t"] = complex_json(t);
    doc["arithmetic"] = "double";
  }
  doc["pass"] = residual_zero;
  return {doc, residual_zero ? 0 : 1};
}

Outcome cmd_descent_membership(const RunConfig& cfg, const std::string& element) {
  const LatticePtr L = lattice_from_spec(cfg.lattice);
  RingElement f{L, {}};
  if (element == "z") f.terms = {{EllipticExpr(1.0), 1, 0}};
  else if (element == "zeta") f.terms = {{EllipticExpr(1.0), 0, 1}};
  else if (element == "composite") f.terms = {{g_expr(Which::p, cfg.p, cfg.q, L), -1, 0}, {EllipticExpr(1.0), 0, 1}};
  else throw UsageError("--element must be z, zeta or composite");
  const auto rep = r_ring_membership_demo(f, cfg.p, cfg.q, cfg.seed);
  json doc = membership_json(rep);
  doc["element"] = element;
  return {doc, rep.pass ? 0 : 1};
}

Outcome cmd_self_test(const RunConfig& cfg, const std::string& module) {
  const auto suites = selftest::run_module(module, cfg.seed);
  json doc = selftest::report_json(suites, cfg.seed);
  doc["module"] = module;
  return {doc, doc["pass"].get<bool>() ? 0 : 1};
}

}  // namespace ellipdiff::cli
