#include <nlohmann/json.hpp>

#include "ellipdiff/expr.hpp"
#include "ellipdiff/json_io.hpp"

namespace ellipdiff {

using nlohmann::json;

namespace {

json rational_json(const Rational& r) { return json::array({r.numerator(), r.denominator()}); }

Rational rational_from(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_array() && j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer()) {
    const auto d = j[1].get<std::int64_t>();
    if (d == 0) fail(Errc::Schema, "rational with zero denominator");
    return Rational(j[0].get<std::int64_t>(), d);
  }
  fail(Errc::Schema, "expected an integer or [num, den]");
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(Errc::Schema, std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

json to_json(const EllipticExpr& e) {
  using K = EllipticExpr::Kind;
  switch (e.kind()) {
    case K::Const: return {{"atom", "const"}, {"c", complex_json(e.value())}};
    case K::Z: return {{"atom", "z"}, {"m", rational_json(e.multiplier())}};
    case K::Zeta:
      return {{"atom", "zeta"}, {"m", rational_json(e.multiplier())}, {"z0", complex_json(e.shift())}};
    case K::Wp:
      return {{"atom", "wp"},
              {"m", rational_json(e.multiplier())},
              {"z0", complex_json(e.shift())},
              {"deriv", e.deriv()}};
    case K::Sum:
    case K::Prod: {
      json a = json::array();
      for (const auto& x : e.args()) a.push_back(to_json(x));
      return {{"op", e.kind() == K::Sum ? "sum" : "prod"}, {"args", a}};
    }
    case K::Pow: return {{"op", "pow"}, {"base", to_json(e.args()[0])}, {"n", e.exponent()}};
    case K::Quot: return {{"op", "quot"}, {"num", to_json(e.args()[0])}, {"den", to_json(e.args()[1])}};
  }
  return nullptr;
}

EllipticExpr expr_from_json(const json& j, const LatticePtr& L) {
  if (j.is_number()) return EllipticExpr(j.get<double>());
  if (j.is_array()) return EllipticExpr(complex_from_json(j));
  if (!j.is_object()) fail(Errc::Schema, "expression must be a number, [re,im] or an object");
  try {
    if (j.contains("atom")) {
      const std::string a = field(j, "atom").get<std::string>();
      if (a == "const") return EllipticExpr(complex_from_json(field(j, "c")));
      const Rational m = j.contains("m") ? rational_from(j.at("m")) : Rational(1);
      const cplx z0 = j.contains("z0") ? complex_from_json(j.at("z0")) : cplx(0);
      if (a == "z") return EllipticExpr::z(m);
      if (!L) fail(Errc::Schema, "atom requires a lattice");
      if (a == "zeta") return EllipticExpr::zeta(L, m, z0);
      if (a == "wp") return EllipticExpr::wp(L, m, z0, j.contains("deriv") ? j.at("deriv").get<int>() : 0);
      fail(Errc::Schema, "unknown atom '" + a + "'");
    }
    const std::string op = field(j, "op").get<std::string>();
    if (op == "sum" || op == "prod") {
      const json& args = field(j, "args");
      if (!args.is_array() || args.empty()) fail(Errc::Schema, "args must be a nonempty array");
      std::vector<EllipticExpr> v;
      for (const auto& x : args) v.push_back(expr_from_json(x, L));
      return op == "sum" ? EllipticExpr::sum(std::move(v)) : EllipticExpr::product(std::move(v));
    }
    if (op == "pow") return EllipticExpr::power(expr_from_json(field(j, "base"), L), field(j, "n").get<int>());
    if (op == "quot")
      return EllipticExpr::quotient(expr_from_json(field(j, "num"), L), expr_from_json(field(j, "den"), L));
    fail(Errc::Schema, "unknown op '" + op + "'");
  } catch (const json::exception& ex) {
    fail(Errc::Schema, ex.what());
  }
}

json to_json(const MatrixExpr& m) {
  using K = MatrixExpr::Kind;
  switch (m.kind()) {
    case K::Leaf: {
      json rows = json::array();
      for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(to_json(m.entry(i, j)));
        rows.push_back(row);
      }
      return rows;
    }
    case K::Product:
    case K::BlockDiag: {
      json a = json::array();
      for (const auto& c : m.children()) a.push_back(to_json(c));
      return {{"op", m.kind() == K::Product ? "product" : "blockdiag"}, {"args", a}};
    }
    case K::Inverse: return {{"op", "inverse"}, {"arg", to_json(m.children()[0])}};
  }
  return nullptr;
}

MatrixExpr matrix_from_json(const json& j, const LatticePtr& L) {
  try {
    if (j.is_array()) {
      if (j.empty() || !j[0].is_array() || j[0].empty()) fail(Errc::Schema, "matrix must be a nonempty nested array");
      const int rows = static_cast<int>(j.size()), cols = static_cast<int>(j[0].size());
      std::vector<EllipticExpr> e;
      for (const auto& row : j) {
        if (!row.is_array() || static_cast<int>(row.size()) != cols) fail(Errc::Schema, "ragged matrix rows");
        for (const auto& x : row) e.push_back(expr_from_json(x, L));
      }
      return MatrixExpr(rows, cols, std::move(e));
    }
    const std::string op = field(j, "op").get<std::string>();
    if (op == "inverse") return MatrixExpr::inverse(matrix_from_json(field(j, "arg"), L));
    if (op == "product" || op == "blockdiag") {
      std::vector<MatrixExpr> v;
      for (const auto& x : field(j, "args")) v.push_back(matrix_from_json(x, L));
      return op == "product" ? MatrixExpr::product(std::move(v)) : MatrixExpr::block_diag(std::move(v));
    }
    fail(Errc::Schema, "unknown matrix op '" + op + "'");
  } catch (const json::exception& ex) {
    fail(Errc::Schema, ex.what());
  } catch (const Error& ex) {
    if (ex.code() == Errc::DimensionMismatch) fail(Errc::Schema, ex.what());
    throw;
  }
}

}  // namespace ellipdiff
