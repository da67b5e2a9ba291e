#pragma once

#include <nlohmann/json.hpp>

#include "ellipdiff/types.hpp"
#include "ellipdiff/weierstrass.hpp"

namespace ellipdiff {

nlohmann::json complex_json(cplx c);
cplx complex_from_json(const nlohmann::json& j);
nlohmann::json matrix_json(const Matrix& m);
Matrix matrix_from_json_numeric(const nlohmann::json& j);
nlohmann::json lattice_json(const Lattice& L);
LatticePtr lattice_from_json(const nlohmann::json& j);

}  // namespace ellipdiff
