#pragma once

#include "stabgi/dense.hpp"
#include "stabgi/geninv.hpp"
#include "stabgi/subspace.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stabgi {

/// A standing hypothesis of an analysis step does not hold.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double rank = kDefaultSubspaceTol;   ///< relative cut for spans and null spaces
  double inverse = 1e-10;              ///< theta_inv = inverse * max(sigma_max(W), 1)
  double gi = 1e-10;                   ///< verify_gi residual tolerance
  double distance = kSubspaceEqualTol; ///< gap metric / membership tolerance
};

/// T, its generalized inverse, a perturbation dT and the two carrier maps
/// WY = I + dT S (on Y) and WX = I + S dT (on X). Every derived subspace is
/// computed once at construction.
class PerturbedSystem {
 public:
  PerturbedSystem(GiBundle bundle, Matrix dT, Tolerances tol = {});

  const GiBundle& bundle() const { return bundle_; }
  const Matrix& T() const { return bundle_.T; }
  const Matrix& S() const { return bundle_.S; }
  const Matrix& dT() const { return dT_; }
  const Matrix& Tbar() const { return Tbar_; }
  /// ||T|| + ||dT||, the size of the rounding in Tbar. Rank decisions on Tbar
  /// and its products cut relative to this, so a Tbar that cancels to noise
  /// counts as zero.
  double Tbar_scale() const { return Tbar_scale_; }
  const Matrix& WY() const { return WY_; }
  const Matrix& WX() const { return WX_; }
  const Tolerances& tol() const { return tol_; }

  Eigen::Index rows() const { return T().rows(); }
  Eigen::Index cols() const { return T().cols(); }

  const Subspace& range_T() const { return range_T_; }
  const Subspace& null_T() const { return null_T_; }
  const Subspace& range_S() const { return range_S_; }
  const Subspace& null_S() const { return null_S_; }
  const Subspace& range_Tbar() const { return range_Tbar_; }
  const Subspace& null_Tbar() const { return null_Tbar_; }

 private:
  GiBundle bundle_;
  Matrix dT_;
  Matrix Tbar_;
  double Tbar_scale_ = 0.0;
  Matrix WY_;
  Matrix WX_;
  Tolerances tol_;
  Subspace range_T_;
  Subspace null_T_;
  Subspace range_S_;
  Subspace null_S_;
  Subspace range_Tbar_;
  Subspace null_Tbar_;
};

struct NamedMargin {
  std::string name;
  Margin margin;
};

/// A boolean verdict with the numbers that decided it.
struct Condition {
  bool holds = false;
  std::vector<NamedMargin> margins;
  std::optional<Vector> witness;

  bool borderline(double band = 10.0) const;
  /// The margin closest to its threshold (log scale), if any.
  std::optional<NamedMargin> critical() const;
};

struct BijectivityCertificate {
  bool bij_Y = false;
  bool bij_X = false;
  double sigma_min_WY = 0.0;
  double sigma_min_WX = 0.0;
  double theta_WY = 0.0;
  double theta_WX = 0.0;
  Margin margin_WY;  ///< sigma_min / max(sigma_max, 1) of WY against the relative threshold
  Margin margin_WX;
  std::optional<Matrix> C;       ///< WY^-1
  std::optional<Matrix> WX_inv;  ///< WX^-1
  /// ||WX^-1 - (I - S C dT)||, when both maps are invertible.
  std::optional<double> inverse_identity_residual;

  bool inverse_identity_ok(double tol = 1e-8) const;
};

BijectivityCertificate bijectivity_pair(const PerturbedSystem& sys);

/// Three equivalent characterizations of the carrier map being bijective.
struct CarrierConditions {
  Condition carrier_bijective;     ///< I + dT S bijective on Y
  Condition restricted_bijective;  ///< (I + S dT) restricted to R(S) bijective
  Condition decomposition;         ///< Y = Tbar R(S) (+) N(S) and N(Tbar) meets R(S) trivially

  bool agree() const;
};

CarrierConditions dl1_conditions(const PerturbedSystem& sys);

/// R(Tbar) meets N(S) only at 0.
Condition stability(const PerturbedSystem& sys);

/// G = S (I + dT S)^-1. Throws SingularMatrixError when WY is not invertible.
Matrix compute_G(const PerturbedSystem& sys);

/// ||S WY^-1 - WX^-1 S||; throws when either carrier map is singular.
double g_two_formula_residual(const PerturbedSystem& sys);

/// Five equivalent characterizations of a stable perturbation, evaluated
/// under an invertible carrier map.
struct StabilityConditions {
  Condition stable_intersection;   ///< R(Tbar) meets N(S) trivially
  Condition gi_of_Tbar;            ///< G is a generalized inverse of Tbar with R(G)=R(S), N(G)=N(S)
  Condition null_into_range;       ///< WY^-1 Tbar maps N(T) into R(T)
  Condition range_transport;       ///< WY^-1 R(Tbar) = R(T)
  Condition null_transport;        ///< WX^-1 N(T) = N(Tbar)
  Matrix G;
  GiResiduals G_residuals;

  bool agree() const;
};

/// Throws PreconditionError unless WY is invertible.
StabilityConditions dl2_conditions(const PerturbedSystem& sys);

struct DecompositionCheck {
  Condition null_meets_range;       ///< N(Tbar) meets R(S) trivially
  Condition range_meets_null;       ///< R(Tbar) meets N(S) trivially
  Condition decomposition_domain;   ///< N(Tbar) + R(S) = X
  Condition decomposition_codomain; ///< N(S) + R(Tbar) = Y
  bool bij_Y = false;
  bool stable = false;
  bool implication_1_ok = true;  ///< all four conditions => bij_Y
  bool implication_2_ok = true;  ///< bij_Y and stable => both decompositions

  bool all_four() const;
};

DecompositionCheck cor32_check(const PerturbedSystem& sys);

struct PerturbedProjectors {
  Matrix Pbar;  ///< WX^-1 P WX
  Matrix Qbar;  ///< WY Q WY^-1
  double pbar_formula_gap = 0.0;  ///< ||Pbar - (I - G Tbar)||
  double qbar_formula_gap = 0.0;  ///< ||Qbar - Tbar G||
  double pbar_idempotency = 0.0;
  double qbar_idempotency = 0.0;
  SubspaceDistance pbar_range_vs_null_Tbar;
  SubspaceDistance qbar_range_vs_range_Tbar;
  double scale = 1.0;  ///< (1 + ||Tbar||)(1 + ||G||)
};

/// Requires an invertible carrier map and a stable perturbation.
PerturbedProjectors perturbed_projectors(const PerturbedSystem& sys);

/// Compares the literal printed expression WY S WY^-1 for the range
/// idempotent with Tbar G. It only type-checks when T is square.
struct PrintedQbarComparison {
  bool shape_consistent = false;
  std::optional<double> printed_gap;         ///< ||WY S WY^-1 - Tbar G||
  std::optional<double> printed_idempotency; ///< ||X^2 - X|| for the printed form
  double corrected_gap = 0.0;                ///< ||WY T S WY^-1 - Tbar G||
};

PrintedQbarComparison printed_qbar_comparison(const PerturbedSystem& sys);

/// a ||S|| + b ||T S|| < 1.
bool norm_condition(const PerturbedSystem& sys, double a, double b);

struct MinimalA {
  double value = 0.0;  ///< best value found; a lower bound of the true minimum a
  bool heuristic = true;
  Vector argmax;
};

/// Smallest a with ||dT x|| <= a ||x|| + b ||T x||, by multi-start ascent of
/// ||dT x|| - b ||T x|| along great circles of the unit sphere. Starts are the
/// right singular vectors of dT plus `starts` seeded random unit vectors.
MinimalA minimal_a(const PerturbedSystem& sys, double b, int starts = 64,
                   std::uint64_t seed = 0);
MinimalA minimal_a(const Matrix& T, const Matrix& dT, double b, int starts = 64,
                   std::uint64_t seed = 0);

struct AnalysisReport {
  BijectivityCertificate bijectivity;
  CarrierConditions dl1;
  std::optional<StabilityConditions> dl2;
  Condition stable;
  std::optional<Matrix> G;  ///< present iff WY is invertible
  std::optional<GiResiduals> G_residuals;
  bool G_certified = false;  ///< invertible carrier map and stable
  std::optional<PerturbedProjectors> projectors;
  DecompositionCheck cor32;
  double c = 0.0;
  double norm_Tplus = 0.0;
  Eigen::Index rank_T = 0;
  Eigen::Index rank_Tbar = 0;
  std::map<std::string, double> decision_margins;

  /// Every decision margin, for borderline screening.
  std::vector<NamedMargin> all_margins() const;
};

AnalysisReport analyze(const PerturbedSystem& sys);

}  // namespace stabgi
