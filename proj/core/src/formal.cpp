#include "ellipdiff/formal.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "ellipdiff/json_io.hpp"

namespace ellipdiff {

namespace {

constexpr double kClusterTol = 1e-6;
constexpr double kAmbiguousTol = 1e-4;

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double rel_dist(cplx a, cplx b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

Eigen::VectorXcd eigenvalues_of(const Matrix& A) {
  Eigen::ComplexSchur<Matrix> schur(A, false);
  if (schur.info() != Eigen::Success) fail(Errc::InvalidInput, "Schur decomposition failed");
  return schur.matrixT().diagonal();
}

void require_invertible(const Matrix& A, Errc code, const char* what) {
  if (A.rows() != A.cols() || A.rows() == 0) fail(Errc::DimensionMismatch, std::string(what) + " must be square");
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& s = svd.singularValues();
  if (!(s(s.size() - 1) > 1e-12 * s(0))) fail(code, std::string(what) + " is singular");
}

// Smallest i in [1, N] with ratio mu/lambda = p^i for some eigenvalue pair, or 0.
int resonance_exponent(const Eigen::VectorXcd& ev, double p, int lo, int hi) {
  for (int i = lo; i <= hi; ++i) {
    const double pi = std::pow(p, i);
    for (Eigen::Index a = 0; a < ev.size(); ++a)
      for (Eigen::Index b = 0; b < ev.size(); ++b)
        if (rel_dist(ev(b), pi * ev(a)) <= kClusterTol) return i;
  }
  return 0;
}

double coefficient_scale(const SeriesMatrix& M, int n) {
  double s = 1.0;
  for (int k = std::min(0, M.valuation()); k <= n; ++k) s = std::max(s, max_abs(M.coefficient(k)));
  return s;
}

}  // namespace

int restriction_exponent(cplx c, double p) {
  const double m = std::abs(c);
  if (!(m > 0)) fail(Errc::SingularInput, "zero eigenvalue");
  int k = -static_cast<int>(std::floor(std::log(m) / std::log(p)));
  for (int guard = 0; guard < 4; ++guard) {
    const double v = m * std::pow(p, k);
    if (v < 1.0 - 1e-12)
      ++k;
    else if (v >= p * (1.0 - 1e-12))
      --k;
    else
      break;
  }
  return k;
}

std::vector<EigenCluster> eigen_clusters(const Matrix& A0, double p) {
  const Eigen::VectorXcd ev = eigenvalues_of(A0);
  const int n = static_cast<int>(ev.size());
  std::vector<int> label(n, -1);
  int next = 0;
  for (int a = 0; a < n; ++a) {
    if (label[a] >= 0) continue;
    label[a] = next;
    // single linkage
    for (bool grew = true; grew;) {
      grew = false;
      for (int b = 0; b < n; ++b) {
        if (label[b] >= 0) continue;
        for (int c = 0; c < n; ++c)
          if (label[c] == next && rel_dist(ev(b), ev(c)) <= kClusterTol) {
            label[b] = next;
            grew = true;
            break;
          }
      }
    }
    ++next;
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (label[a] != label[b]) {
        const double d = rel_dist(ev(a), ev(b));
        if (d <= kAmbiguousTol)
          fail(Errc::InvalidInput, "ambiguous eigenvalue clustering (relative gap " + std::to_string(d) + ")");
      }
  std::vector<EigenCluster> out(next, EigenCluster{0.0, 0, 0});
  for (int a = 0; a < n; ++a) {
    out[label[a]].value += ev(a);
    ++out[label[a]].multiplicity;
  }
  for (auto& c : out) {
    c.value /= double(c.multiplicity);
    c.exponent = restriction_exponent(c.value, p);
  }
  return out;
}

PRestriction p_restrict(const Matrix& A0, double p) {
  require_invertible(A0, Errc::SingularInput, "A0");
  const int n = static_cast<int>(A0.rows());
  PRestriction res;
  res.clusters = eigen_clusters(A0, p);
  res.basis = Matrix(n, n);
  int col = 0;
  for (const auto& c : res.clusters) {
    // generalized eigenspace: kernel of (A0 - c)^m
    Matrix M = Matrix::Identity(n, n);
    for (int k = 0; k < c.multiplicity; ++k) M = M * (A0 - c.value * Matrix::Identity(n, n));
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
    res.basis.middleCols(col, c.multiplicity) = svd.matrixV().rightCols(c.multiplicity);
    col += c.multiplicity;
  }
  Eigen::FullPivLU<Matrix> lu(res.basis);
  if (!lu.isInvertible()) fail(Errc::InvalidInput, "generalized eigenspaces are not independent");
  Matrix blocks = lu.inverse() * A0 * res.basis;
  Matrix A0r = Matrix::Zero(n, n);
  col = 0;
  for (const auto& c : res.clusters) {
    const int m = c.multiplicity;
    Eigen::ComplexSchur<Matrix> schur(blocks.block(col, col, m, m));
    res.basis.middleCols(col, m) = res.basis.middleCols(col, m) * schur.matrixU();
    A0r.block(col, col, m, m) = std::pow(p, c.exponent) * schur.matrixT();
    for (int k = 0; k < m; ++k) res.exponents.push_back(c.exponent);
    col += m;
  }
  const Matrix check = res.basis.inverse() * A0 * res.basis;
  Matrix off = check;
  col = 0;
  for (const auto& c : res.clusters) {
    off.block(col, col, c.multiplicity, c.multiplicity).setZero();
    col += c.multiplicity;
  }
  if (max_abs(off) > 1e-8 * std::max(1.0, max_abs(A0)))
    fail(Errc::InvalidInput, "eigenvalue clusters do not split A0");
  res.A0r = A0r;
  return res;
}

Matrix solve_twisted_sylvester(const Matrix& A0, cplx factor, const Matrix& F) {
  const int n = static_cast<int>(A0.rows());
  Eigen::ComplexSchur<Matrix> schur(A0);
  const Matrix& Q = schur.matrixU();
  const Matrix& R = schur.matrixT();
  const Matrix G = Q.adjoint() * F * Q;
  Matrix Y = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    Vector rhs = G.col(k);
    for (int l = 0; l < k; ++l) rhs -= factor * R(l, k) * Y.col(l);
    Matrix M = factor * R(k, k) * Matrix::Identity(n, n) - R;
    for (int j = 0; j < n; ++j)
      if (std::abs(M(j, j)) <= 1e-14 * std::max(1.0, std::abs(R(j, j))))
        fail(Errc::Resonant, "twisted Sylvester operator is singular");
    Y.col(k) = M.triangularView<Eigen::Upper>().solve(rhs);
  }
  return Q * Y * Q.adjoint();
}

double gauge_relation_residual(const SeriesMatrix& A, const SeriesMatrix& C, const Matrix& A0, double p, int N) {
  const SeriesMatrix lhs = scale_argument(C, p) * SeriesMatrix::constant(A0, N);
  const SeriesMatrix rhs = A * C;
  double res = 0;
  for (int n = 0; n <= N; ++n) {
    const double scale = coefficient_scale(A, n) * coefficient_scale(C, n);
    res = std::max(res, max_abs(lhs.coefficient(n) - rhs.coefficient(n)) / scale);
  }
  return res;
}

SeriesMatrix solve_gauge_series(const SeriesMatrix& A, int p, int N) {
  if (A.valuation() < 0) fail(Errc::NotRegularSingular, "A must be holomorphic at 0");
  const int n = A.rows();
  const Matrix A0 = A.coefficient(0);
  require_invertible(A0, Errc::NotRegularSingular, "A(0)");
  if (const int i = resonance_exponent(eigenvalues_of(A0), p, 1, N))
    throw ResonantError(i, "A(0) has eigenvalues with ratio p^" + std::to_string(i));
  // p^{-i} C_i A0 - A0 C_i = sum_{j=1}^{i} A_j C_{i-j}
  std::vector<Matrix> Ak(N + 1), Ck(N + 1);
  for (int i = 0; i <= N; ++i) Ak[i] = A.coefficient(i);
  Ck[0] = Matrix::Identity(n, n);
  for (int i = 1; i <= N; ++i) {
    Matrix rhs = Matrix::Zero(n, n);
    for (int j = 1; j <= i; ++j) rhs += Ak[j] * Ck[i - j];
    Ck[i] = solve_twisted_sylvester(A0, std::pow(double(p), -i), rhs);
  }
  return SeriesMatrix::from_coefficients(Ck, 0, N);
}

FormalReduction reduce_to_constants(const SeriesMatrix& A, const SeriesMatrix& B, int p, int q, int N) {
  if (N < 0) fail(Errc::InvalidInput, "truncation order must be >= 0");
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    fail(Errc::DimensionMismatch, "A and B must be square of the same size");
  if (A.valuation() < 0 || B.valuation() < 0)
    fail(Errc::NotRegularSingular, "A and B must be holomorphic at 0");
  if (A.order() < N || B.order() < N) fail(Errc::InvalidInput, "input series are truncated below N");
  const int n = A.rows();
  FormalReduction out;
  out.order = N;
  out.A0 = A.coefficient(0);
  require_invertible(out.A0, Errc::NotRegularSingular, "A(0)");
  require_invertible(B.coefficient(0), Errc::NotRegularSingular, "B(0)");

  out.C = solve_gauge_series(A, p, N);
  out.relation_residual = gauge_relation_residual(A, out.C, out.A0, p, N);

  const SeriesMatrix Bt = invert(scale_argument(out.C, q)) * B * out.C;
  out.B0 = Bt.coefficient(0);
  const double b0scale = std::max(1.0, max_abs(out.B0));
  for (int i = 1; i <= std::min(N, Bt.order()); ++i) {
    const double scale = b0scale * coefficient_scale(B, i) * coefficient_scale(out.C, i);
    out.b0_residual = std::max(out.b0_residual, max_abs(Bt.coefficient(i)) / scale);
  }
  if (out.b0_residual >= 1e-9)
    fail(Errc::B0NotConstant, "C(z/q)^{-1} B C is not constant (residual " + std::to_string(out.b0_residual) + ")");
  out.commutator = max_abs(out.A0 * out.B0 - out.B0 * out.A0) / std::max(1.0, max_abs(out.A0) * max_abs(out.B0));

  out.restricted = p_restrict(out.A0, p);
  out.B0r = out.restricted.basis.inverse() * out.B0 * out.restricted.basis;
  for (int i = 0; i < n; ++i) out.B0r.row(i) *= std::pow(double(q), out.restricted.exponents[i]);
  return out;
}

FormalReduction reduce_pair(const DifferencePair& P, int N) {
  const SeriesMatrix A = P.A().laurent_at0(N), B = P.B().laurent_at0(N);
  if (A.valuation() < 0 || B.valuation() < 0)
    fail(Errc::NotRegularSingular, "pair has a pole at 0; choose a shifted base point");
  return reduce_to_constants(A, B, P.p(), P.q(), N);
}

UniquenessVerdict uniqueness_probe(const SeriesMatrix& A, const SeriesMatrix& C1, const Matrix& A01,
                                   const SeriesMatrix& C2, const Matrix& A02, double p, int R) {
  UniquenessVerdict v;
  const int N = std::min({A.order(), C1.order(), C2.order()});
  v.relations_hold = gauge_relation_residual(A, C1, A01, p, N) < 1e-9 &&
                     gauge_relation_residual(A, C2, A02, p, N) < 1e-9;
  v.a0_diff = max_abs(A01 - A02);
  v.c_diff = max_coeff_diff(C1, C2);
  v.agree = v.a0_diff < 1e-9 && v.c_diff < 1e-9;

  Eigen::ComplexEigenSolver<Matrix> right(A01), left(A01.transpose());
  const auto& lr = right.eigenvalues();
  const auto& ll = left.eigenvalues();
  for (int i = std::max(R, 1); i <= N && v.witness_exponent < 0; ++i) {
    const double pi = std::pow(p, i);
    for (Eigen::Index a = 0; a < lr.size() && v.witness_exponent < 0; ++a)
      for (Eigen::Index b = 0; b < ll.size(); ++b)
        if (rel_dist(ll(b), pi * lr(a)) <= kClusterTol) {
          v.witness_exponent = i;
          v.witness = right.eigenvectors().col(a) * left.eigenvectors().col(b).transpose();
          break;
        }
  }
  v.uniqueness_expected = v.witness_exponent < 0;
  if (v.uniqueness_expected)
    v.message = v.agree ? "unique: A0 and C coincide" : "uniqueness expected but the inputs differ";
  else
    v.message = "conjugation by A0 has eigenvalue p^" + std::to_string(v.witness_exponent) +
                "; C (I + z^i D) is another solution";
  return v;
}

SynthesizedPair synthesize_formal_pair(const Matrix& A0, const Matrix& B0, const std::vector<Matrix>& C0_coeffs,
                                       int p, int q, int N) {
  const int n = static_cast<int>(A0.rows());
  std::vector<Matrix> coeffs{Matrix::Identity(n, n)};
  coeffs.insert(coeffs.end(), C0_coeffs.begin(), C0_coeffs.end());
  const int order = N + 2;
  SynthesizedPair s;
  s.C0 = SeriesMatrix::from_coefficients(coeffs, 0, order);
  const SeriesMatrix Ci = invert(s.C0);
  s.A = (scale_argument(s.C0, p) * SeriesMatrix::constant(A0, order) * Ci).truncated(N);
  s.B = (scale_argument(s.C0, q) * SeriesMatrix::constant(B0, order) * Ci).truncated(N);
  return s;
}

nlohmann::json reduction_json(const FormalReduction& f) {
  nlohmann::json j;
  j["order"] = f.order;
  j["A0"] = matrix_json(f.A0);
  j["B0"] = matrix_json(f.B0);
  nlohmann::json cs = nlohmann::json::array();
  for (int i = 0; i <= f.order; ++i) cs.push_back(matrix_json(f.C.coefficient(i)));
  j["C_coefficients"] = cs;
  j["exponents"] = f.restricted.exponents;
  j["A0_restricted"] = matrix_json(f.restricted.A0r);
  j["B0_restricted"] = matrix_json(f.B0r);
  j["relation_residual"] = f.relation_residual;
  j["b0_residual"] = f.b0_residual;
  j["commutator"] = f.commutator;
  return j;
}

}  // namespace ellipdiff
