#include "stabgi/subspace.hpp"

#include "support/helpers.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace stabgi;
using testing_support::mat;
using testing_support::vec;

namespace {

Subspace line(std::initializer_list<double> v) {
  return Subspace::span(vec(v));
}

Matrix e(int i, int n) { return Matrix::Identity(n, n).col(i); }

/// Random subspace of R^n of dimension k from a seeded Gaussian draw.
Subspace random_subspace(std::mt19937_64& rng, int n, int k) {
  if (k == 0) return Subspace::trivial(n);
  return Subspace::span(oracle::gaussian(rng, n, k));
}

}  // namespace

TEST(Sum, CoordinateAxes) {
  const auto s = sum(Subspace::span(e(0, 3)), Subspace::span(e(1, 3)));
  EXPECT_EQ(s.dim(), 2);
  EXPECT_LT(s.residual(e(0, 3)), 1e-15);
  EXPECT_LT(s.residual(e(1, 3)), 1e-15);
  EXPECT_NEAR(s.residual(e(2, 3)), 1.0, 1e-15);
}

TEST(Sum, SkewLinesFillPlane) {
  // rank of [[1,1],[0,1]] is 2
  EXPECT_EQ(oracle::jacobi_rank(mat({{1, 1}, {0, 1}}), 1e-12), 2);
  EXPECT_EQ(sum(line({1, 0}), line({1, 1})).dim(), 2);
}

TEST(Sum, Idempotent) {
  const auto U = line({1, 2, 3});
  const auto s = sum(U, U);
  EXPECT_EQ(s.dim(), 1);
  EXPECT_TRUE(distance(s, U).equal());
}

TEST(Sum, AmbientMismatch) {
  EXPECT_THROW(sum(line({1, 0}), line({1, 0, 0})), DimensionError);
  EXPECT_THROW(intersect(line({1, 0}), line({1, 0, 0})), DimensionError);
}

TEST(Intersect, SkewLinesTrivial) {
  const auto r = intersect(line({1, 0}), line({1, 1}));
  EXPECT_EQ(r.space.dim(), 0);
  EXPECT_FALSE(r.witness.has_value());
}

TEST(Intersect, SubsetCase) {
  const auto r = intersect(Subspace::whole(2), line({1, 1}));
  ASSERT_EQ(r.space.dim(), 1);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_NEAR(std::abs(r.witness->dot(vec({1, 1})) / std::sqrt(2.0)), 1.0, 1e-14);
}

TEST(Intersect, Idempotent) {
  const auto U = Subspace::span(mat({{1, 0}, {0, 1}, {1, 1}}));
  const auto r = intersect(U, U);
  EXPECT_TRUE(distance(r.space, U).equal());
}

TEST(Intersect, DimensionFormulaProperty) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 7);
    const int k = static_cast<int>(rng() % (n + 1));
    const int l = static_cast<int>(rng() % (n + 1));
    const auto U = random_subspace(rng, n, k);
    const auto V = random_subspace(rng, n, l);
    const auto I = intersect(U, V);
    const auto S = sum(U, V);
    // generic position: dim(U + V) = min(n, k + l)
    EXPECT_EQ(S.dim(), std::min(n, k + l));
    EXPECT_EQ(I.space.dim() + S.dim(), U.dim() + V.dim());
    if (I.witness) {
      EXPECT_LT(U.residual(*I.witness), 1e-10);
      EXPECT_LT(V.residual(*I.witness), 1e-10);
      EXPECT_NEAR(I.witness->norm(), 1.0, 1e-12);
    }
  }
}

TEST(IsComplement, Examples) {
  EXPECT_TRUE(is_complement(line({1, 0}), line({0, 1})));
  // det [[1,1],[0,1]] = 1
  EXPECT_NEAR(mat({{1, 1}, {0, 1}}).determinant(), 1.0, 1e-15);
  EXPECT_TRUE(is_complement(line({1, 0}), line({1, 1})));
  EXPECT_FALSE(is_complement(line({1, 0}), line({1, 0})));
  EXPECT_FALSE(is_complement(line({1, 0, 0}), line({0, 1, 0})));
}

TEST(Distance, Examples) {
  const auto U = line({1, 2});
  EXPECT_NEAR(distance(U, U).value, 0.0, 1e-15);
  EXPECT_NEAR(distance(line({1, 0}), line({0, 1})).value, 1.0, 1e-15);
  // principal angle: cos = <(1,0),(1,1)/sqrt2>
  const double cosine = vec({1, 0}).dot(vec({1, 1}).normalized());
  const double expected = std::sqrt(1 - cosine * cosine);
  EXPECT_NEAR(distance(line({1, 0}), line({1, 1})).value, expected, 1e-15);
  EXPECT_NEAR(expected, std::sqrt(2.0) / 2, 1e-15);
}

TEST(Distance, DimensionMismatchSentinel) {
  const auto d = distance(line({1, 0}), Subspace::whole(2));
  EXPECT_TRUE(d.dim_mismatch);
  EXPECT_EQ(d.value, 1.0);
  EXPECT_FALSE(d.equal());
}

TEST(Distance, SymmetricAndBoundedProperty) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const int k = 1 + static_cast<int>(rng() % (n - 1));
    const auto U = random_subspace(rng, n, k);
    const auto V = random_subspace(rng, n, k);
    const double a = distance(U, V).value;
    EXPECT_NEAR(a, distance(V, U).value, 1e-12);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0 + 1e-14);
    // same span from a different basis is equal
    const Matrix mix = oracle::gaussian(rng, k, k) + 4 * Matrix::Identity(k, k);
    EXPECT_TRUE(distance(U, Subspace::span(U.basis() * mix)).equal());
  }
}

TEST(OrthogonalComplement, Examples) {
  const auto c = orthogonal_complement(Subspace::span(e(0, 3)));
  EXPECT_EQ(c.dim(), 2);
  EXPECT_TRUE(distance(c, Subspace::span(mat({{0, 0}, {1, 0}, {0, 1}}))).equal());
  EXPECT_EQ(orthogonal_complement(Subspace::trivial(2)).dim(), 2);
  const auto d = orthogonal_complement(line({1, 1}));
  EXPECT_TRUE(distance(d, line({1, -1})).equal());
}

TEST(OrthogonalComplement, Property) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 7);
    const int k = static_cast<int>(rng() % (n + 1));
    const auto U = random_subspace(rng, n, k);
    const auto C = orthogonal_complement(U);
    EXPECT_EQ(U.dim() + C.dim(), n);
    EXPECT_TRUE(is_complement(U, C));
    if (k > 0 && k < n) EXPECT_LT((U.basis().transpose() * C.basis()).norm(), 1e-12);
  }
}

TEST(RandomComplement, Examples) {
  const auto U = Subspace::span(e(0, 2));
  const auto c = random_complement(U, 1);
  EXPECT_EQ(c.dim(), 1);
  EXPECT_FALSE(distance(c, U).equal());
  EXPECT_TRUE(is_complement(U, c));
  EXPECT_EQ(random_complement(Subspace::whole(4), 3).dim(), 0);
  EXPECT_EQ(random_complement(Subspace::trivial(4), 3).dim(), 4);
}

TEST(RandomComplement, DeterministicAndValidProperty) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 7);
    const int k = static_cast<int>(rng() % (n + 1));
    const auto U = random_subspace(rng, n, k);
    const std::uint64_t seed = rng();
    const auto a = random_complement(U, seed);
    const auto b = random_complement(U, seed);
    EXPECT_TRUE(is_complement(U, a));
    EXPECT_EQ(a.basis(), b.basis());
  }
}

TEST(Span, ReferenceNormSuppressesNoise) {
  const Matrix noise = 1e-17 * Matrix::Ones(3, 3);
  EXPECT_EQ(Subspace::span(noise).dim(), 1);
  EXPECT_EQ(Subspace::span(noise, kDefaultSubspaceTol, 1.0).dim(), 0);
  EXPECT_EQ(Subspace::null_space(Matrix::Zero(2, 3)).dim(), 3);
  EXPECT_EQ(Subspace::null_space(mat({{1, 1, 0}})).dim(), 2);
}
