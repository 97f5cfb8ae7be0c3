#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace stabgi {

/// Dense real matrix, the finite-dimensional stand-in for an operator X -> Y.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Malformed input: non-finite entries, bad shapes, negative constants.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown by solve_square when the system matrix is singular to tolerance.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, double sigma_min)
      : std::runtime_error(what), sigma_min_(sigma_min) {}

  double sigma_min() const noexcept { return sigma_min_; }

 private:
  double sigma_min_;
};

/// Throws InputError when any entry of M is NaN or infinite.
void require_finite(const Matrix& M, const char* what = "matrix");

/// Rank decision together with orthonormal bases of range and null space.
struct RankFactorization {
  Eigen::Index rank = 0;
  Matrix range_basis;  ///< rows x rank, orthonormal columns
  Matrix null_basis;   ///< cols x (cols - rank), orthonormal columns
  Vector singular_values;
  double tol_used = 0.0;
};

/// Default numerical-rank threshold sigma_max * max(rows, cols) * 2^-52.
double default_rank_tol(const Matrix& M);

/// Singular values strictly above `tol` count towards the rank. A negative
/// `tol` selects default_rank_tol(M).
RankFactorization rank_factorization(const Matrix& M, double tol = -1.0);

struct SingularExtremes {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};

/// Largest and smallest of the min(rows, cols) singular values.
SingularExtremes singular_extremes(const Matrix& M);

/// Spectral norm. Zero for empty matrices.
double norm2(const Matrix& M);

/// Solves A X = B. Throws SingularMatrixError when
/// sigma_min(A) <= rel_threshold * sigma_max(A).
Matrix solve_square(const Matrix& A, const Matrix& B, double rel_threshold = 1e-10);

}  // namespace stabgi
