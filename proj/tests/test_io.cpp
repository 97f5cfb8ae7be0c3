#include "stabgi/matrix_io.hpp"
#include "stabgi/report.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace stabgi;

namespace {

Matrix awkward_matrix(std::mt19937_64& rng) {
  const int m = 1 + static_cast<int>(rng() % 6);
  const int n = 1 + static_cast<int>(rng() % 6);
  Matrix M = oracle::gaussian(rng, m, n);
  std::uniform_int_distribution<int> ex(-300, 300);
  for (Eigen::Index i = 0; i < M.size(); ++i) {
    if (rng() % 4 == 0) M.data()[i] = std::ldexp(M.data()[i], ex(rng));
    if (rng() % 9 == 0) M.data()[i] = 0.0;
    if (rng() % 11 == 0) M.data()[i] = std::numeric_limits<double>::denorm_min() * (1 + rng() % 7);
  }
  return M;
}

std::size_t error_line(const char* text) {
  try {
    parse_matrix_csv(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(Csv, Parses) {
  const Matrix M = parse_matrix_csv("1, 2.5,-3e-2\n 0,1e300 ,4\r\n");
  ASSERT_EQ(M.rows(), 2);
  ASSERT_EQ(M.cols(), 3);
  EXPECT_EQ(M(0, 2), -3e-2);
  EXPECT_EQ(M(1, 1), 1e300);
}

TEST(Csv, Diagnostics) {
  EXPECT_EQ(error_line("1,2\n3\n"), 2u);
  EXPECT_EQ(error_line("1,x\n"), 1u);
  EXPECT_EQ(error_line("1,2\n\n3,4\n"), 2u);
  EXPECT_EQ(error_line("1,nan\n"), 1u);
  EXPECT_EQ(error_line("1,,2\n"), 1u);
  try {
    parse_matrix_csv("1,2,3\n4,5,oops\n");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 3u);
  }
  EXPECT_THROW(parse_matrix_csv(""), ParseError);
  EXPECT_THROW(read_matrix_csv("/nonexistent/matrix.csv"), InputError);
}

TEST(Csv, RoundTripProperty) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const Matrix M = awkward_matrix(rng);
    const Matrix back = parse_matrix_csv(format_matrix_csv(M));
    ASSERT_EQ(back.rows(), M.rows());
    ASSERT_EQ(back.cols(), M.cols());
    for (Eigen::Index i = 0; i < M.size(); ++i) {
      EXPECT_EQ(back.data()[i], M.data()[i]);
    }
  }
}

TEST(Json, MatrixRoundTripProperty) {
  std::mt19937_64 rng(102);
  for (int trial = 0; trial < 300; ++trial) {
    const Matrix M = awkward_matrix(rng);
    const Json j = matrix_to_json(M);
    EXPECT_EQ(j["rows"], M.rows());
    EXPECT_EQ(j["cols"], M.cols());
    const Matrix back = matrix_from_json(Json::parse(j.dump(2)));
    ASSERT_EQ(back.rows(), M.rows());
    for (Eigen::Index i = 0; i < M.size(); ++i) EXPECT_EQ(back.data()[i], M.data()[i]);
  }
}

TEST(Json, RowMajorLayout) {
  Matrix M(2, 2);
  M << 1, 2, 3, 4;
  EXPECT_EQ(matrix_to_json(M)["data"], Json::parse("[1.0, 2.0, 3.0, 4.0]"));
}

TEST(Json, AnalysisReportShape) {
  PerturbedSystem sys(moore_penrose(Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix()),
                      Eigen::Vector2d(0, 0.5).asDiagonal().toDenseMatrix());
  const Json j = analysis_report(analyze(sys));
  EXPECT_EQ(j["schema"], kReportSchema);
  EXPECT_EQ(j["stable"], false);
  EXPECT_TRUE(j["certified"].is_null());
  EXPECT_EQ(j["G_certified"], false);
  EXPECT_NEAR(j["G_verify"]["r1"].get<double>(), 0.5, 1e-12);
  EXPECT_EQ(j["dl2"]["stable_intersection"]["holds"], false);
  EXPECT_EQ(j["dl1"].size(), 4u);
}

TEST(Json, GeninvReportShape) {
  const auto b = moore_penrose(Eigen::Vector2d(2, 0).asDiagonal().toDenseMatrix());
  const Json j = geninv_report(b, 1);
  EXPECT_EQ(j["rank"], 1);
  EXPECT_EQ(j["c"], 1.0);
  EXPECT_EQ(matrix_from_json(j["S"])(0, 0), 0.5);
  EXPECT_EQ(j["residuals"]["pass"], true);
}
