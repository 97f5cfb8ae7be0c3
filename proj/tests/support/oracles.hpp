#pragma once

// Test-only reference computations. Nothing here calls into the library's
// factorization code, so the results can serve as independent expected values.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Singular values by one-sided (Hestenes) Jacobi rotations, descending.
inline std::vector<double> jacobi_singular_values(Matrix A) {
  if (A.rows() < A.cols()) A.transposeInPlace();
  const Eigen::Index n = A.cols();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = A.col(p).squaredNorm();
        const double beta = A.col(q).squaredNorm();
        const double gamma = A.col(p).dot(A.col(q));
        if (std::abs(gamma) <= 1e-300) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const Vector ap = A.col(p);
        A.col(p) = c * ap - s * A.col(q);
        A.col(q) = s * ap + c * A.col(q);
      }
    }
    if (off < 1e-15) break;
  }
  std::vector<double> sv(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) sv[static_cast<std::size_t>(j)] = A.col(j).norm();
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

/// Numerical rank from the Jacobi singular values.
inline int jacobi_rank(const Matrix& A, double rel_tol) {
  const auto sv = jacobi_singular_values(A);
  if (sv.empty() || sv[0] == 0.0) return 0;
  return static_cast<int>(std::count_if(sv.begin(), sv.end(),
                                        [&](double s) { return s > rel_tol * sv[0]; }));
}

/// Root of a continuous function on [lo, hi] with a sign change.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Singular values of a 2x2 matrix from the characteristic polynomial of
/// A^T A, lambda^2 - tr lambda + det, roots found by bisection.
inline std::pair<double, double> singular_values_2x2(const Matrix& A) {
  const Matrix G = A.transpose() * A;
  const double tr = G.trace();
  const double det = G.determinant();
  auto p = [&](double x) { return x * x - tr * x + det; };
  const double mid = tr / 2.0;
  const double big = bisect(p, mid, tr + 1.0);
  const double small = bisect([&](double x) { return -p(x); }, 0.0, mid);
  return {std::sqrt(big), std::sqrt(std::max(0.0, small))};
}

/// Least-squares solve of the stacked linear system
///   T S T = T,  S T = I - P,  T S = Q,  S (I - Q) = 0
/// for vec(S) through Kronecker products.
inline Matrix brute_force_gi(const Matrix& T, const Matrix& P, const Matrix& Q) {
  const Eigen::Index m = T.rows();
  const Eigen::Index n = T.cols();
  auto kron = [](const Matrix& A, const Matrix& B) {
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      for (Eigen::Index j = 0; j < A.cols(); ++j)
        K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
  };
  auto vec = [](const Matrix& A) { return Eigen::Map<const Vector>(A.data(), A.size()); };
  const Matrix Im = Matrix::Identity(m, m);
  const Matrix In = Matrix::Identity(n, n);
  // vec(A X B) = (B^T kron A) vec(X)
  const Matrix K1 = kron(T.transpose(), T);
  const Matrix K2 = kron(T.transpose(), In);
  const Matrix K3 = kron(Im, T);
  const Matrix K4 = kron((Im - Q).transpose(), In);
  Matrix K(K1.rows() + K2.rows() + K3.rows() + K4.rows(), n * m);
  K << K1, K2, K3, K4;
  Vector rhs(K.rows());
  rhs << vec(T), vec(In - P), vec(Q), Vector::Zero(K4.rows());
  const Vector s = K.completeOrthogonalDecomposition().solve(rhs);
  return Eigen::Map<const Matrix>(s.data(), n, m);
}

/// Dense angular sampling of max_x ||D x|| - b ||T x|| over the unit circle.
inline double circle_max(const Matrix& T, const Matrix& D, double b, int samples = 200000) {
  double best = -1e300;
  for (int i = 0; i < samples; ++i) {
    const double th = M_PI * i / samples;
    Vector x(2);
    x << std::cos(th), std::sin(th);
    best = std::max(best, (D * x).norm() - b * (T * x).norm());
  }
  return best;
}

inline Matrix gaussian(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> nd;
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = nd(rng);
  return M;
}

}  // namespace oracle
