#pragma once

#include "stabgi/dense.hpp"
#include "stabgi/subspace.hpp"

#include <optional>
#include <string>

namespace stabgi {

/// Raised when a pair of subspaces fails to split the ambient space.
class ComplementError : public std::runtime_error {
 public:
  ComplementError(const std::string& what, std::optional<Vector> witness,
                  Eigen::Index dimension_deficit)
      : std::runtime_error(what),
        witness_(std::move(witness)),
        deficit_(dimension_deficit) {}

  /// Unit vector common to both subspaces, when that is the failure.
  const std::optional<Vector>& witness() const noexcept { return witness_; }
  /// ambient_dim - (dim V + dim W); nonzero when the dimensions do not add up.
  Eigen::Index dimension_deficit() const noexcept { return deficit_; }

 private:
  std::optional<Vector> witness_;
  Eigen::Index deficit_;
};

/// Spectral-norm residuals of the defining identities of a generalized inverse.
struct GiResiduals {
  double r1 = 0.0;      ///< ||T S T - T||
  double r2 = 0.0;      ///< ||S T S - S||
  double idem_P = 0.0;  ///< ||P^2 - P||, P = I - S T
  double idem_Q = 0.0;  ///< ||Q^2 - Q||, Q = T S
  double scale = 1.0;   ///< (1 + ||T||)(1 + ||S||)
  bool pass = false;

  double worst_relative() const;
};

/// An operator T together with a generalized inverse S and the idempotents
/// P = I - S T (onto N(T)) and Q = T S (onto R(T)).
struct GiBundle {
  Matrix T;
  Matrix S;
  Matrix P;
  Matrix Q;
  GiResiduals residuals;

  /// Completes P, Q and the residuals for an arbitrary pair (T, S).
  static GiBundle from_pair(Matrix T, Matrix S, double tol = 1e-10);
};

/// Complements of N(T) in the domain (M) and of R(T) in the codomain (W).
struct ComplementChoice {
  Subspace M;
  Subspace W;

  static ComplementChoice orthogonal(const Matrix& T, double rel_tol = kDefaultSubspaceTol);
};

/// Idempotent with range V and null space W: [B_V | 0] [B_V | B_W]^-1.
Matrix oblique_projector(const Subspace& V, const Subspace& W);

/// The unique generalized inverse with R(S) = M and N(S) = W.
GiBundle build_gi(const Matrix& T, const ComplementChoice& choice,
                  double rel_tol = kDefaultSubspaceTol);

/// build_gi with orthogonal complements.
GiBundle moore_penrose(const Matrix& T, double rel_tol = kDefaultSubspaceTol);

/// Residuals of Def. of a generalized inverse; passes when every residual is
/// at most tol * (1 + ||T||)(1 + ||S||).
GiResiduals verify_gi(const Matrix& T, const Matrix& S, double tol = 1e-10);

/// c = ||T S||, the norm of the range idempotent.
double norm_c(const GiBundle& bundle);

}  // namespace stabgi
