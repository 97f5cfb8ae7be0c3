#include "stabgi/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace stabgi {

namespace {

constexpr double kComplementSeparation = 1e-3;
constexpr int kMaxComplementDraws = 100;

void require_same_ambient(const Subspace& U, const Subspace& V) {
  if (U.ambient_dim() != V.ambient_dim()) {
    throw DimensionError("subspaces live in different ambient dimensions");
  }
}

// Singular value nearest the cut in log scale.
Margin nearest_to_cut(const Vector& sv, double scale, double rel_tol) {
  Margin m;
  m.threshold = rel_tol;
  if (!(scale > 0.0)) return m;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double ratio = sv(i) / scale;
    const double d = ratio > 0.0 ? std::abs(std::log(ratio / rel_tol))
                                 : std::numeric_limits<double>::infinity();
    if (d < best) {
      best = d;
      m.value = ratio;
    }
  }
  if (!std::isfinite(best)) m.value = 0.0;
  return m;
}

struct PairSvd {
  Eigen::Index rank = 0;
  Matrix null_basis;
  Margin margin;
};

PairSvd analyze_pair(const Subspace& U, const Subspace& V) {
  require_same_ambient(U, V);
  const double tol = std::max(U.tol(), V.tol());
  PairSvd out;
  out.margin.threshold = tol;
  const Eigen::Index ku = U.dim();
  const Eigen::Index kv = V.dim();
  if (ku + kv == 0) {
    out.null_basis = Matrix(0, 0);
    return out;
  }
  Matrix cat(U.ambient_dim(), ku + kv);
  cat << U.basis(), -V.basis();
  Eigen::JacobiSVD<Matrix> svd(cat, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol * smax) ++r;
  }
  out.rank = r;
  out.null_basis = svd.matrixV().rightCols(ku + kv - r);
  // Only singular values of pairs that actually compete matter.
  if (ku > 0 && kv > 0) out.margin = nearest_to_cut(s, smax, tol);
  return out;
}

Matrix orthonormalize(const Matrix& A, Eigen::Index k) {
  if (k == 0) return Matrix(A.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(k);
}

}  // namespace

Subspace Subspace::span(const Matrix& vectors, double rel_tol, double reference_norm) {
  require_finite(vectors, "spanning set");
  const Eigen::Index n = vectors.rows();
  if (vectors.cols() == 0 || n == 0) return trivial(n, rel_tol);
  Eigen::JacobiSVD<Matrix> svd(vectors, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  const double smax = std::max(s(0), reference_norm);
  Eigen::Index r = 0;
  if (smax > 0.0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > rel_tol * smax) ++r;
    }
  }
  return Subspace(svd.matrixU().leftCols(r), rel_tol, nearest_to_cut(s, smax, rel_tol));
}

Subspace Subspace::null_space(const Matrix& M, double rel_tol, double reference_norm) {
  require_finite(M, "operator");
  const Eigen::Index n = M.cols();
  if (M.rows() == 0) return whole(n, rel_tol);
  if (n == 0) return trivial(0, rel_tol);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double smax = std::max(s(0), reference_norm);
  Eigen::Index r = 0;
  if (smax > 0.0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > rel_tol * smax) ++r;
    }
  }
  return Subspace(svd.matrixV().rightCols(n - r), rel_tol, nearest_to_cut(s, smax, rel_tol));
}

Subspace Subspace::from_orthonormal(Matrix basis, double tol) {
  require_finite(basis, "basis");
  return Subspace(std::move(basis), tol, Margin{std::numeric_limits<double>::infinity(), tol});
}

Subspace Subspace::trivial(Eigen::Index ambient_dim, double tol) {
  return from_orthonormal(Matrix(ambient_dim, 0), tol);
}

Subspace Subspace::whole(Eigen::Index ambient_dim, double tol) {
  return from_orthonormal(Matrix::Identity(ambient_dim, ambient_dim), tol);
}

Matrix Subspace::projector() const { return basis_ * basis_.transpose(); }

double Subspace::residual(const Matrix& vectors) const {
  if (vectors.rows() != ambient_dim()) throw DimensionError("residual: ambient mismatch");
  const Matrix r = vectors - basis_ * (basis_.transpose() * vectors);
  return norm2(r);
}

Subspace sum(const Subspace& U, const Subspace& V) {
  require_same_ambient(U, V);
  const double tol = std::max(U.tol(), V.tol());
  Matrix cat(U.ambient_dim(), U.dim() + V.dim());
  cat << U.basis(), V.basis();
  return Subspace::span(cat, tol);
}

IntersectResult intersect(const Subspace& U, const Subspace& V) {
  const PairSvd pair = analyze_pair(U, V);
  const double tol = std::max(U.tol(), V.tol());
  const Eigen::Index k = pair.null_basis.cols();
  if (k == 0) {
    return {Subspace::trivial(U.ambient_dim(), tol), std::nullopt, pair.margin};
  }
  const Matrix coeffs = pair.null_basis.topRows(U.dim());
  Matrix in_u = U.basis() * coeffs;
  Subspace W = Subspace::from_orthonormal(orthonormalize(in_u, k), tol);

  // Last null column pairs with the smallest singular value.
  Vector w = in_u.col(k - 1);
  w.normalize();
  return {std::move(W), std::move(w), pair.margin};
}

bool is_complement(const Subspace& U, const Subspace& V) {
  require_same_ambient(U, V);
  if (U.dim() + V.dim() != U.ambient_dim()) return false;
  return intersect(U, V).space.dim() == 0;
}

SubspaceDistance distance(const Subspace& U, const Subspace& V) {
  if (U.ambient_dim() != V.ambient_dim() || U.dim() != V.dim()) return {1.0, true};
  if (U.dim() == 0) return {0.0, false};
  return {std::min(1.0, V.residual(U.basis())), false};
}

Subspace orthogonal_complement(const Subspace& U) {
  const Eigen::Index n = U.ambient_dim();
  if (U.dim() == 0) return Subspace::whole(n, U.tol());
  if (U.dim() == n) return Subspace::trivial(n, U.tol());
  Eigen::JacobiSVD<Matrix> svd(U.basis(), Eigen::ComputeFullU);
  return Subspace::from_orthonormal(svd.matrixU().rightCols(n - U.dim()), U.tol());
}

Subspace random_complement(const Subspace& U, std::uint64_t seed) {
  const Eigen::Index n = U.ambient_dim();
  const Eigen::Index k = n - U.dim();
  if (k == 0) return Subspace::trivial(n, U.tol());
  if (U.dim() == 0) return Subspace::whole(n, U.tol());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < kMaxComplementDraws; ++attempt) {
    Matrix draw(n, k);
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index i = 0; i < n; ++i) draw(i, j) = normal(rng);
    const Matrix C = orthonormalize(draw, k);
    Matrix cat(n, n);
    cat << U.basis(), C;
    if (singular_extremes(cat).sigma_min >= kComplementSeparation) {
      return Subspace::from_orthonormal(C, U.tol());
    }
  }
  throw std::runtime_error("random_complement: no well-separated complement after 100 draws");
}

}  // namespace stabgi
