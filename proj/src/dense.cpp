#include "stabgi/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stabgi {

namespace {

Eigen::JacobiSVD<Matrix> full_svd(const Matrix& M) {
  return Eigen::JacobiSVD<Matrix>(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

}  // namespace

void require_finite(const Matrix& M, const char* what) {
  if (!M.allFinite()) {
    throw InputError(std::string(what) + " has non-finite entries");
  }
}

double default_rank_tol(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  const double smax = norm2(M);
  return smax * static_cast<double>(std::max(M.rows(), M.cols())) *
         std::numeric_limits<double>::epsilon();
}

RankFactorization rank_factorization(const Matrix& M, double tol) {
  require_finite(M);
  RankFactorization out;
  const Eigen::Index m = M.rows();
  const Eigen::Index n = M.cols();

  if (M.size() == 0) {
    out.range_basis = Matrix(m, 0);
    out.null_basis = Matrix::Identity(n, n);
    out.tol_used = tol > 0.0 ? tol : std::numeric_limits<double>::min();
    return out;
  }

  const auto svd = full_svd(M);
  out.singular_values = svd.singularValues();
  if (tol < 0.0) {
    const double smax = out.singular_values.size() ? out.singular_values(0) : 0.0;
    tol = smax * static_cast<double>(std::max(m, n)) *
          std::numeric_limits<double>::epsilon();
  }
  // The zero matrix yields tol == 0; keep the contract tol_used > 0.
  out.tol_used = tol > 0.0 ? tol : std::numeric_limits<double>::min();

  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    if (out.singular_values(i) > out.tol_used) ++r;
  }
  out.rank = r;
  out.range_basis = svd.matrixU().leftCols(r);
  out.null_basis = svd.matrixV().rightCols(n - r);
  return out;
}

SingularExtremes singular_extremes(const Matrix& M) {
  require_finite(M);
  if (M.size() == 0) return {};
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  return {s(0), s(s.size() - 1)};
}

double norm2(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

Matrix solve_square(const Matrix& A, const Matrix& B, double rel_threshold) {
  require_finite(A, "system matrix");
  require_finite(B, "right-hand side");
  if (A.rows() != A.cols()) throw InputError("solve_square: matrix is not square");
  if (A.rows() != B.rows()) throw InputError("solve_square: row count mismatch");
  if (A.size() == 0) return Matrix(0, B.cols());

  const auto ext = singular_extremes(A);
  if (!(ext.sigma_min > rel_threshold * ext.sigma_max)) {
    throw SingularMatrixError("solve_square: matrix is singular to tolerance",
                              ext.sigma_min);
  }
  return A.fullPivLu().solve(B);
}

}  // namespace stabgi
