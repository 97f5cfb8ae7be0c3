#include "stabgi/geninv.hpp"

#include <algorithm>

namespace stabgi {

namespace {

void require_complement(const Subspace& V, const Subspace& W, const char* what) {
  if (V.ambient_dim() != W.ambient_dim()) {
    throw ComplementError(std::string(what) + ": ambient dimensions differ", std::nullopt, 0);
  }
  const Eigen::Index deficit = V.ambient_dim() - V.dim() - W.dim();
  auto meet = intersect(V, W);
  if (meet.space.dim() > 0) {
    throw ComplementError(std::string(what) + ": subspaces intersect nontrivially",
                          std::move(meet.witness), deficit);
  }
  if (deficit != 0) {
    throw ComplementError(std::string(what) + ": dimensions do not add up to the ambient space",
                          std::nullopt, deficit);
  }
}

}  // namespace

double GiResiduals::worst_relative() const {
  return std::max({r1, r2, idem_P, idem_Q}) / scale;
}

GiResiduals verify_gi(const Matrix& T, const Matrix& S, double tol) {
  if (S.rows() != T.cols() || S.cols() != T.rows()) {
    throw InputError("verify_gi: S must have the transposed shape of T");
  }
  require_finite(T, "T");
  require_finite(S, "S");
  GiResiduals out;
  const Matrix TS = T * S;
  const Matrix ST = S * T;
  const Matrix P = Matrix::Identity(T.cols(), T.cols()) - ST;
  out.r1 = norm2(TS * T - T);
  out.r2 = norm2(ST * S - S);
  out.idem_P = norm2(P * P - P);
  out.idem_Q = norm2(TS * TS - TS);
  out.scale = (1.0 + norm2(T)) * (1.0 + norm2(S));
  const double bound = tol * out.scale;
  out.pass = out.r1 <= bound && out.r2 <= bound && out.idem_P <= bound && out.idem_Q <= bound;
  return out;
}

GiBundle GiBundle::from_pair(Matrix T, Matrix S, double tol) {
  GiBundle b;
  b.residuals = verify_gi(T, S, tol);
  b.P = Matrix::Identity(T.cols(), T.cols()) - S * T;
  b.Q = T * S;
  b.T = std::move(T);
  b.S = std::move(S);
  return b;
}

ComplementChoice ComplementChoice::orthogonal(const Matrix& T, double rel_tol) {
  return {orthogonal_complement(Subspace::null_space(T, rel_tol)),
          orthogonal_complement(Subspace::span(T, rel_tol))};
}

Matrix oblique_projector(const Subspace& V, const Subspace& W) {
  require_complement(V, W, "oblique_projector");
  const Eigen::Index n = V.ambient_dim();
  if (V.dim() == 0) return Matrix::Zero(n, n);
  if (W.dim() == 0) return Matrix::Identity(n, n);
  Matrix basis(n, n);
  basis << V.basis(), W.basis();
  Matrix image = Matrix::Zero(n, n);
  image.leftCols(V.dim()) = V.basis();
  // P * basis = image  <=>  basis^T P^T = image^T
  return solve_square(basis.transpose(), image.transpose()).transpose();
}

GiBundle build_gi(const Matrix& T, const ComplementChoice& choice, double rel_tol) {
  require_finite(T, "T");
  const Eigen::Index m = T.rows();
  const Eigen::Index n = T.cols();
  if (choice.M.ambient_dim() != n || choice.W.ambient_dim() != m) {
    throw ComplementError("build_gi: complement ambient dimensions do not match T", std::nullopt, 0);
  }
  const Subspace null_T = Subspace::null_space(T, rel_tol);
  const Subspace range_T = Subspace::span(T, rel_tol);
  require_complement(choice.M, null_T, "build_gi (domain)");
  require_complement(range_T, choice.W, "build_gi (codomain)");

  Matrix S;
  if (range_T.dim() == 0) {
    S = Matrix::Zero(n, m);
  } else {
    // T restricted to M is injective onto R(T); invert it there and
    // annihilate W through the range idempotent.
    const Matrix Q = oblique_projector(range_T, choice.W);
    const Matrix TM = T * choice.M.basis();
    S = choice.M.basis() * TM.colPivHouseholderQr().solve(Q);
  }
  return GiBundle::from_pair(T, std::move(S), rel_tol);
}

GiBundle moore_penrose(const Matrix& T, double rel_tol) {
  return build_gi(T, ComplementChoice::orthogonal(T, rel_tol), rel_tol);
}

double norm_c(const GiBundle& bundle) { return norm2(bundle.Q); }

}  // namespace stabgi
