#pragma once

#include "stabgi/dense.hpp"

#include <cstdint>
#include <limits>
#include <optional>

namespace stabgi {

/// Relative singular-value threshold used for every dimension decision made
/// on computed spans (ranges, null spaces, sums, intersections).
inline constexpr double kDefaultSubspaceTol = 1e-10;

/// Equality threshold on the gap metric between two subspaces.
inline constexpr double kSubspaceEqualTol = 1e-8;

/// A numeric quantity backing a boolean decision. The decision compares
/// `value` against `threshold`; it is borderline when the two lie within a
/// factor `band` of each other.
struct Margin {
  double value = std::numeric_limits<double>::infinity();
  double threshold = 0.0;

  bool borderline(double band = 10.0) const {
    return value > threshold / band && value < threshold * band;
  }
};

/// Linear subspace of R^n held as an orthonormal basis (possibly with zero
/// columns for the trivial subspace).
class Subspace {
 public:
  /// Column span of `vectors`; singular values at or below
  /// rel_tol * max(sigma_max, reference_norm) are discarded. Pass a reference
  /// norm when the matrix may be pure rounding noise (an idempotent that
  /// should vanish, say).
  static Subspace span(const Matrix& vectors, double rel_tol = kDefaultSubspaceTol,
                       double reference_norm = 0.0);

  /// Null space of M under the same relative threshold.
  static Subspace null_space(const Matrix& M, double rel_tol = kDefaultSubspaceTol,
                             double reference_norm = 0.0);

  /// Wraps a basis already known to be orthonormal.
  static Subspace from_orthonormal(Matrix basis, double tol = kDefaultSubspaceTol);

  static Subspace trivial(Eigen::Index ambient_dim, double tol = kDefaultSubspaceTol);
  static Subspace whole(Eigen::Index ambient_dim, double tol = kDefaultSubspaceTol);

  Eigen::Index ambient_dim() const { return basis_.rows(); }
  Eigen::Index dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }
  double tol() const { return tol_; }

  /// Singular value (relative to the largest) nearest the rank cut, when the
  /// subspace came out of a rank decision.
  const Margin& rank_margin() const { return rank_margin_; }

  /// Orthogonal projector onto the subspace.
  Matrix projector() const;

  /// Norm of the component of each column of `vectors` orthogonal to the
  /// subspace (spectral norm of the residual block).
  double residual(const Matrix& vectors) const;

 private:
  Subspace(Matrix basis, double tol, Margin margin)
      : basis_(std::move(basis)), tol_(tol), rank_margin_(margin) {}

  Matrix basis_;
  double tol_;
  Margin rank_margin_;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

Subspace sum(const Subspace& U, const Subspace& V);

struct IntersectResult {
  Subspace space;
  std::optional<Vector> witness;  ///< unit vector in U and V when dim > 0
  Margin margin;                  ///< singular value of [B_U | -B_V] nearest the cut
};

/// Intersection from the null space of [B_U | -B_V].
IntersectResult intersect(const Subspace& U, const Subspace& V);

bool is_complement(const Subspace& U, const Subspace& V);

struct SubspaceDistance {
  double value = 1.0;         ///< sine of the largest principal angle
  bool dim_mismatch = false;  ///< value is the sentinel 1 when set

  bool equal(double tol = kSubspaceEqualTol) const { return !dim_mismatch && value <= tol; }
};

SubspaceDistance distance(const Subspace& U, const Subspace& V);

Subspace orthogonal_complement(const Subspace& U);

/// Seeded random complement of U. Draws are rejected while the smallest
/// singular value of [B_U | C] stays below 1e-3; gives up after 100 draws.
Subspace random_complement(const Subspace& U, std::uint64_t seed);

}  // namespace stabgi
