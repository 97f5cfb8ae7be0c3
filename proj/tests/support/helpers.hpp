#pragma once

#include "stabgi/dense.hpp"

#include <initializer_list>

namespace testing_support {

using stabgi::Matrix;
using stabgi::Vector;

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix M(static_cast<Eigen::Index>(rows.size()),
           rows.size() ? static_cast<Eigen::Index>(rows.begin()->size()) : 0);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) M(i, j++) = v;
    ++i;
  }
  return M;
}

inline Matrix diag(std::initializer_list<double> d) {
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

inline Vector vec(std::initializer_list<double> d) {
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v;
}

inline double gap(const Matrix& A, const Matrix& B) { return (A - B).cwiseAbs().maxCoeff(); }

}  // namespace testing_support
