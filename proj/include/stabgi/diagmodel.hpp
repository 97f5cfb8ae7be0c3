#pragma once

#include "stabgi/dense.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stabgi {

/// Entries at or below this magnitude form the zero pattern of a diagonal.
inline constexpr double kZeroPatternTol = 1e-14;

/// Truncation T e_k = t_k e_k of a diagonal operator on l^2. Unbounded
/// operators show up as growth of |t_k| along the truncation; nothing said
/// about a DiagonalOperator extends past its last entry.
class DiagonalOperator {
 public:
  explicit DiagonalOperator(std::vector<double> entries, std::string tail_note = {});

  std::size_t truncation() const { return entries_.size(); }
  const std::vector<double>& entries() const { return entries_; }
  double operator[](std::size_t k) const { return entries_[k]; }
  const std::string& tail_note() const { return tail_note_; }

  /// Indices k with |t_k| <= kZeroPatternTol.
  const std::vector<std::size_t>& zero_pattern() const { return zeros_; }
  bool is_zero(std::size_t k) const { return std::abs(entries_[k]) <= kZeroPatternTol; }

 private:
  std::vector<double> entries_;
  std::string tail_note_;
  std::vector<std::size_t> zeros_;
};

/// Per-coordinate maximal Tseng inverse: 1/t_k off the zero pattern, 0 on it.
DiagonalOperator diag_gi(const DiagonalOperator& t);

struct DiagAnalysis {
  bool stable = false;
  bool bijective = false;
  /// g_k = 1/(t_k + d_k) off the zero pattern; present only when bijective.
  std::optional<std::vector<double>> G_entries;
  /// min |t_k + d_k| over the entries above the zero threshold. A proxy for
  /// closedness of R(T + dT) on the truncation only.
  std::optional<double> range_closed_margin;
  double c = 0.0;
  double b_min = 0.0;
  double bc = 0.0;
  double theta_inv = 0.0;
  double min_carrier = 0.0;  ///< min |1 + d_k/t_k| off the zero pattern
  std::vector<std::size_t> unstable_indices;
};

DiagAnalysis diag_analyze(const DiagonalOperator& t, const DiagonalOperator& d,
                          double inverse_tol = 1e-10);

/// Exact minimal a with ||D x|| <= a ||x|| + b ||T x|| on the truncation:
/// max(0, max_k (|d_k| - b |t_k|)).
double diag_tbound(const DiagonalOperator& t, const DiagonalOperator& d, double b);

Matrix embed(const DiagonalOperator& t);

/// Result of replaying a diagonal pair through the dense pipeline.
struct DiagCrossCheck {
  bool matrix_stable = false;
  bool matrix_bijective = false;
  bool stable_agrees = false;
  bool bijective_agrees = false;
  /// max_k |g_k - G_kk| / (1 + |g_k|), plus the largest off-diagonal |G_ij|.
  std::optional<double> G_gap;

  bool agree(double g_tol = 1e-12) const;
};

DiagCrossCheck cross_validate(const DiagonalOperator& t, const DiagonalOperator& d,
                              const DiagAnalysis& analysis);

struct DiagSpec {
  DiagonalOperator t;
  DiagonalOperator d;
};

class DiagSpecError : public InputError {
 public:
  using InputError::InputError;
};

/// Parses the diagonal spec JSON. Formula families are evaluated at the
/// 1-based position k = index + 1. `truncate` overrides the "truncation" field.
DiagSpec parse_diag_spec(std::string_view json_text, std::optional<std::size_t> truncate = {});

}  // namespace stabgi
