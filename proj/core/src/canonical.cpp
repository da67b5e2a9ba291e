#include "ellipdiff/canonical.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ellipdiff/json_io.hpp"

namespace ellipdiff {

namespace {

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::vector<int> offsets(const std::vector<int>& layout) {
  std::vector<int> off(layout.size() + 1, 0);
  for (std::size_t i = 0; i < layout.size(); ++i) off[i + 1] = off[i] + layout[i];
  return off;
}

void check_layout(const std::vector<int>& layout, int rank) {
  if (layout.empty()) fail(Errc::InvalidInput, "empty block layout");
  for (int r : layout)
    if (r < 1) fail(Errc::InvalidInput, "block sizes must be positive");
  if (std::accumulate(layout.begin(), layout.end(), 0) != rank)
    fail(Errc::DimensionMismatch, "block layout does not sum to the rank");
}

Matrix block_nilpotent(const std::vector<int>& layout) {
  const auto off = offsets(layout);
  Matrix N = Matrix::Zero(off.back(), off.back());
  for (std::size_t b = 0; b < layout.size(); ++b)
    N.block(off[b], off[b], layout[b], layout[b]) = nilpotent(layout[b]);
  return N;
}

// Upper triangular Toeplitz matrix with entries f(k) on the k-th superdiagonal.
template <class F>
MatrixExpr toeplitz_expr(int r, F f) {
  std::vector<EllipticExpr> e(std::size_t(r) * r, EllipticExpr(0.0));
  for (int i = 0; i < r; ++i)
    for (int j = i; j < r; ++j) e[std::size_t(i) * r + j] = f(j - i);
  return MatrixExpr(r, r, std::move(e));
}

// Tries to read X as exp(-L) alpha T_s^sp exp(L).
bool match_special(const Matrix& X, double p, double tol, BlockShape& out) {
  const int s = static_cast<int>(X.rows());
  const double scale = std::max(1.0, max_abs(X));
  const cplx alpha = X(0, 0);
  if (std::abs(alpha) <= tol * scale) return false;
  for (int k = 0; k < s; ++k) {
    for (int l = 0; l < k; ++l)
      if (std::abs(X(k, l)) > tol * scale) return false;
    if (std::abs(X(k, k) - alpha * std::pow(p, k)) > tol * scale) return false;
  }
  std::vector<cplx> x(s, 0.0);
  x[0] = 1.0;
  for (int j = 1; j < s; ++j) {
    cplx acc = 0;
    for (int k = 0; k < j; ++k) acc += x[k] * X(k, j);
    x[j] = -acc / (alpha * (std::pow(p, j) - 1.0));
  }
  Matrix E = Matrix::Zero(s, s), D = Matrix::Zero(s, s);
  for (int i = 0; i < s; ++i) {
    D(i, i) = alpha * std::pow(p, i);
    for (int j = i; j < s; ++j) E(i, j) = x[j - i];
  }
  if (max_abs(E * X - D * E) > tol * scale * std::max(1.0, max_abs(E))) return false;
  const Matrix Lg = log_unipotent(E);
  out.s = s;
  out.alpha = alpha;
  out.lambda.clear();
  for (int l = 1; l < s; ++l) out.lambda.push_back(Lg(0, l));
  return true;
}

bool close(cplx x, cplx y) { return std::abs(x - y) <= 1e-9 * std::max({std::abs(x), std::abs(y), 1e-300}); }

}  // namespace

EllipticExpr g_expr(Which which, int p, int q, const LatticePtr& L, cplx z0, PairOptions opts) {
  if (std::gcd(p, q) != 1 && !(opts.allow_mult_indep && multiplicatively_independent(p, q)))
    fail(Errc::NonCoprime, "g_p, g_q need coprime p, q");
  const int outer = which == Which::p ? p : q;
  const int inner = which == Which::p ? q : p;
  return double(outer) * EllipticExpr::zeta(L, inner, z0) - EllipticExpr::zeta(L, std::int64_t(p) * q, z0);
}

Matrix nilpotent(int r) {
  Matrix N = Matrix::Zero(r, r);
  for (int i = 0; i + 1 < r; ++i) N(i, i + 1) = 1.0;
  return N;
}

Matrix special_diagonal(int r, double p) {
  Matrix D = Matrix::Zero(r, r);
  for (int i = 0; i < r; ++i) D(i, i) = std::pow(p, i);
  return D;
}

Matrix exp_nilpotent(const Matrix& X) {
  const auto n = X.rows();
  Matrix result = Matrix::Identity(n, n), term = Matrix::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    term = term * X / double(k);
    result += term;
  }
  return result;
}

Matrix log_unipotent(const Matrix& U) {
  const auto n = U.rows();
  const Matrix X = U - Matrix::Identity(n, n);
  Matrix result = Matrix::Zero(n, n), power = Matrix::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    power = power * X;
    result += (k % 2 ? 1.0 : -1.0) / k * power;
  }
  return result;
}

MatrixExpr unipotent_U(int r, int multiplier, cplx z0, const LatticePtr& L) {
  if (r < 1) fail(Errc::InvalidInput, "U_r needs r >= 1");
  if (r == 1) return MatrixExpr::identity(1);
  const EllipticExpr zt = EllipticExpr::zeta(L, multiplier, z0);
  return toeplitz_expr(r, [&](int k) {
    return k == 0 ? EllipticExpr(1.0) : EllipticExpr::power(zt, k) / factorial(k);
  });
}

MatrixExpr unipotent_U_inverse(int r, int multiplier, cplx z0, const LatticePtr& L) {
  if (r < 1) fail(Errc::InvalidInput, "U_r needs r >= 1");
  if (r == 1) return MatrixExpr::identity(1);
  const EllipticExpr zt = EllipticExpr::zeta(L, multiplier, z0);
  return toeplitz_expr(r, [&](int k) {
    return k == 0 ? EllipticExpr(1.0) : EllipticExpr::power(zt, k) / ((k % 2 ? -1.0 : 1.0) * factorial(k));
  });
}

MatrixExpr block_U(const std::vector<int>& layout, int multiplier, cplx z0, const LatticePtr& L) {
  std::vector<MatrixExpr> blocks;
  for (int r : layout) blocks.push_back(unipotent_U(r, multiplier, z0, L));
  return blocks.size() == 1 ? blocks[0] : MatrixExpr::block_diag(std::move(blocks));
}

MatrixExpr block_U_inverse(const std::vector<int>& layout, int multiplier, cplx z0, const LatticePtr& L) {
  std::vector<MatrixExpr> blocks;
  for (int r : layout) blocks.push_back(unipotent_U_inverse(r, multiplier, z0, L));
  return blocks.size() == 1 ? blocks[0] : MatrixExpr::block_diag(std::move(blocks));
}

DifferencePair special_pair(int r, int p, int q, const LatticePtr& L, cplx z0, PairOptions opts) {
  if (r < 1) fail(Errc::InvalidInput, "rank must be >= 1");
  const EllipticExpr gp = g_expr(Which::p, p, q, L, z0, opts);
  const EllipticExpr gq = g_expr(Which::q, p, q, L, z0, opts);
  auto build = [&](const EllipticExpr& g, double base) {
    std::vector<EllipticExpr> e(std::size_t(r) * r, EllipticExpr(0.0));
    for (int i = 0; i < r; ++i)
      for (int j = i; j < r; ++j) {
        const double c = std::pow(base, i) / factorial(j - i);
        e[std::size_t(i) * r + j] = j == i ? EllipticExpr(c) : c * EllipticExpr::power(g, j - i);
      }
    return MatrixExpr(r, r, std::move(e));
  };
  return DifferencePair(build(gp, p), build(gq, q), p, q, L, opts);
}

double special_factorization_defect(int r, int p, int q, const LatticePtr& L, int n_points,
                                    std::uint64_t seed) {
  const DifferencePair P = special_pair(r, p, q, L);
  const MatrixExpr U = unipotent_U(r, p * q, 0, L), Ui = unipotent_U_inverse(r, p * q, 0, L);
  const Matrix T = special_diagonal(r, p), S = special_diagonal(r, q);
  double defect = 0;
  std::uint64_t state = seed;
  for (int k = 0; k < n_points; ++k) {
    const cplx z = sample_annulus(*L, state);
    const Matrix a = P.A().eval(z), b = P.B().eval(z);
    const Matrix fa = U.eval(z / double(p)) * T * Ui.eval(z);
    const Matrix fb = U.eval(z / double(q)) * S * Ui.eval(z);
    const double sa = std::max(1.0, max_abs(a)), sb = std::max(1.0, max_abs(b));
    defect = std::max({defect, max_abs(a - fa) / sa, max_abs(b - fb) / sb});
  }
  return defect;
}

ModuleType ModuleType::from_layout(const std::vector<int>& layout) {
  ModuleType t;
  t.partition = layout;
  std::sort(t.partition.begin(), t.partition.end());
  return t;
}

int ModuleType::rank() const { return std::accumulate(partition.begin(), partition.end(), 0); }

std::string ModuleType::label() const {
  std::ostringstream os;
  os << '(';
  for (auto it = partition.rbegin(); it != partition.rend(); ++it) os << (it == partition.rbegin() ? "" : ",") << *it;
  os << ')';
  return os.str();
}

ShapeVerdict validate_block_shape(const Matrix& T, const std::vector<int>& layout, double p, double tol) {
  ShapeVerdict v;
  if (T.rows() != T.cols()) fail(Errc::DimensionMismatch, "block-scalar matrix must be square");
  check_layout(layout, static_cast<int>(T.rows()));
  const auto off = offsets(layout);
  const double scale = std::max(1.0, max_abs(T));
  for (std::size_t bi = 0; bi < layout.size(); ++bi)
    for (std::size_t bj = 0; bj < layout.size(); ++bj) {
      const int n = layout[bi], m = layout[bj];
      const Matrix X = T.block(off[bi], off[bj], n, m);
      bool ok = false;
      BlockShape shape;
      for (int s = std::min(n, m); s >= 0 && !ok; --s) {
        Matrix outside = X;
        outside.block(0, m - s, s, s).setZero();
        if (max_abs(outside) > tol * scale) continue;
        if (s == 0) {
          ok = true;
          break;
        }
        ok = match_special(X.block(0, m - s, s, s) / scale, p, tol, shape);
        if (ok) shape.alpha *= scale;
      }
      if (!ok) {
        v.valid = false;
        v.bad_i = static_cast<int>(bi);
        v.bad_j = static_cast<int>(bj);
        v.reason = "block (" + std::to_string(bi) + "," + std::to_string(bj) + ") violates the (0 X; 0 0) shape";
        return v;
      }
      shape.i = static_cast<int>(bi);
      shape.j = static_cast<int>(bj);
      v.blocks.push_back(shape);
    }
  return v;
}

void validate_block_scalar_pair(const BlockScalarPair& bs, int p, int q) {
  if (bs.T.rows() != bs.T.cols() || bs.S.rows() != bs.S.cols() || bs.T.rows() != bs.S.rows())
    fail(Errc::DimensionMismatch, "T and S must be square of the same size");
  check_layout(bs.layout, bs.rank());
  for (const Matrix* M : {&bs.T, &bs.S}) {
    double hadamard = 1;
    for (int j = 0; j < M->cols(); ++j) hadamard *= M->col(j).norm();
    if (!(std::abs(M->determinant()) > 1e-12 * hadamard)) fail(Errc::InvalidInput, "T and S must be invertible");
  }
  const double comm = max_abs(bs.T * bs.S - bs.S * bs.T);
  if (comm >= 1e-10 * std::max(1.0, max_abs(bs.T) * max_abs(bs.S)))
    fail(Errc::NonCommuting, "T and S do not commute (|[T,S]| = " + std::to_string(comm) + ")");
  const ShapeVerdict vt = validate_block_shape(bs.T, bs.layout, p);
  if (!vt.valid) fail(Errc::InvalidBlockShape, "T: " + vt.reason);
  const ShapeVerdict vs = validate_block_shape(bs.S, bs.layout, q);
  if (!vs.valid) fail(Errc::InvalidBlockShape, "S: " + vs.reason);
}

DifferencePair typed_pair(const BlockScalarPair& bs, int p, int q, const LatticePtr& L, cplx z0) {
  validate_block_scalar_pair(bs, p, q);
  const bool scalar = std::all_of(bs.layout.begin(), bs.layout.end(), [](int r) { return r == 1; });
  if (scalar) return DifferencePair(MatrixExpr::constant(bs.T), MatrixExpr::constant(bs.S), p, q, L);
  const MatrixExpr U = block_U(bs.layout, p * q, z0, L);
  const MatrixExpr Ui = block_U_inverse(bs.layout, p * q, z0, L);
  MatrixExpr A = MatrixExpr::product({U.substitute_linear(Rational(1, p)), MatrixExpr::constant(bs.T), Ui});
  MatrixExpr B = MatrixExpr::product({U.substitute_linear(Rational(1, q)), MatrixExpr::constant(bs.S), Ui});
  return DifferencePair(std::move(A), std::move(B), p, q, L);
}

bool is_legitimate(const Matrix& E, const std::vector<int>& layout, double tol) {
  if (E.rows() != E.cols()) return false;
  if (std::accumulate(layout.begin(), layout.end(), 0) != E.rows()) return false;
  const Matrix N = block_nilpotent(layout);
  return max_abs(E * N - N * E) <= tol * std::max(1.0, max_abs(E));
}

BlockScalarPair conjugate_legitimate(const BlockScalarPair& bs, const Matrix& E) {
  check_layout(bs.layout, bs.rank());
  if (!is_legitimate(E, bs.layout)) fail(Errc::NotLegitimate, "E does not commute with U(z)");
  Eigen::FullPivLU<Matrix> lu(E);
  if (!lu.isInvertible()) fail(Errc::NotLegitimate, "E is singular");
  const Matrix Ei = lu.inverse();
  return BlockScalarPair{E * bs.T * Ei, E * bs.S * Ei, bs.layout};
}

std::pair<cplx, cplx> normalize_projective(cplx x, cplx y, double zero_tol) {
  const double n = std::sqrt(std::norm(x) + std::norm(y));
  if (!(n > 0)) fail(Errc::InvalidInput, "projective point (0:0)");
  const cplx first = std::abs(x) > zero_tol * n ? x : y;
  const cplx phase = std::conj(first) / std::abs(first);
  return {x * phase / n, y * phase / n};
}

Classification classify_rank_le3(const BlockScalarPair& bs, int p, int q) {
  if (bs.rank() > 3 || bs.rank() < 1) fail(Errc::InvalidInput, "classifier handles rank 1..3");
  validate_block_scalar_pair(bs, p, q);
  Classification c;
  c.type = bs.type();
  if (c.type.partition.back() == 1) {
    c.klass = "i";
    return c;
  }
  if (c.type.partition.size() == 1) {
    c.klass = "v";
    c.a = bs.T(0, 0);
    c.b = bs.S(0, 0);
    return c;
  }
  // Type (2,1); bring the rank-2 block first.
  Matrix T = bs.T, S = bs.S;
  if (bs.layout[0] == 1) {
    const int perm[3] = {1, 2, 0};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        T(i, j) = bs.T(perm[i], perm[j]);
        S(i, j) = bs.S(perm[i], perm[j]);
      }
  }
  c.a = T(0, 0);
  c.b = S(0, 0);
  c.a2 = T(2, 2);
  c.b2 = S(2, 2);
  const double scale = std::max({1.0, max_abs(T), max_abs(S)});
  auto with_invariant = [&](cplx s, cplx t, const char* klass) {
    if (std::abs(s) <= 1e-12 * scale && std::abs(t) <= 1e-12 * scale) {
      c.klass = "ii";
      return;
    }
    c.klass = klass;
    c.has_invariant = true;
    std::tie(c.inv_s, c.inv_t) = normalize_projective(s, t);
  };
  if (close(c.a2, c.a) && close(c.b2, c.b)) {
    with_invariant(S(0, 2), T(0, 2), "iii");
  } else if (close(c.a2, double(p) * c.a) && close(c.b2, double(q) * c.b)) {
    with_invariant(S(2, 1), T(2, 1), "iv");
  } else {
    c.klass = "ii";
  }
  return c;
}

nlohmann::json block_scalar_to_json(const BlockScalarPair& bs) {
  return {{"T", matrix_json(bs.T)}, {"S", matrix_json(bs.S)}, {"layout", bs.layout}};
}

BlockScalarPair block_scalar_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("T") || !j.contains("S") || !j.contains("layout"))
    fail(Errc::Schema, "block-scalar pair needs T, S and layout");
  BlockScalarPair bs;
  bs.T = matrix_from_json_numeric(j.at("T"));
  bs.S = matrix_from_json_numeric(j.at("S"));
  if (!j.at("layout").is_array()) fail(Errc::Schema, "layout must be an array of positive integers");
  for (const auto& r : j.at("layout")) {
    if (!r.is_number_integer()) fail(Errc::Schema, "layout must be an array of positive integers");
    bs.layout.push_back(r.get<int>());
  }
  return bs;
}

nlohmann::json classification_json(const Classification& c) {
  nlohmann::json j;
  j["class"] = c.klass;
  j["type"] = c.type.label();
  j["rank"] = c.type.rank();
  if (c.klass != "i") {
    j["a"] = complex_json(c.a);
    j["b"] = complex_json(c.b);
  }
  if (c.type.partition.size() == 2) {
    j["a_prime"] = complex_json(c.a2);
    j["b_prime"] = complex_json(c.b2);
  }
  if (c.has_invariant) j["invariant"] = {complex_json(c.inv_s), complex_json(c.inv_t)};
  return j;
}

}  // namespace ellipdiff
