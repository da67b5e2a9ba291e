#include "ellipdiff/json_io.hpp"

#include "ellipdiff/error.hpp"

namespace ellipdiff {

using nlohmann::json;

json complex_json(cplx c) { return json::array({c.real(), c.imag()}); }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  fail(Errc::Schema, "complex numbers are encoded as [re, im]");
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json_numeric(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) fail(Errc::Schema, "matrix must be a nested array");
  const auto rows = static_cast<Eigen::Index>(j.size()), cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols) fail(Errc::Schema, "ragged matrix rows");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(j[i][k]);
  }
  return m;
}

json lattice_json(const Lattice& L) {
  return {{"omega1", complex_json(L.omega1())}, {"omega2", complex_json(L.omega2())}};
}

LatticePtr lattice_from_json(const json& j) {
  if (!j.is_object() || !j.contains("omega1") || !j.contains("omega2"))
    fail(Errc::Schema, "lattice needs omega1 and omega2");
  try {
    return make_lattice_ptr(complex_from_json(j.at("omega1")), complex_from_json(j.at("omega2")));
  } catch (const Error& e) {
    if (e.code() == Errc::DegenerateBasis) throw;
    fail(Errc::Schema, e.what());
  }
}

}  // namespace ellipdiff
