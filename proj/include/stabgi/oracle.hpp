#pragma once

#include "stabgi/perturb.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stabgi {

enum class Regime { StableSmall, RankIncreasing, NullHitting, ZeroPerturbation, FullRank };
enum class ComplementMode { Orthogonal, RandomOblique };

inline constexpr Regime kAllRegimes[] = {Regime::StableSmall, Regime::RankIncreasing,
                                         Regime::NullHitting, Regime::ZeroPerturbation,
                                         Regime::FullRank};

std::string to_string(Regime r);
std::string to_string(ComplementMode c);
std::optional<Regime> parse_regime(const std::string& name);

/// Recipe for one seeded random perturbed system.
struct InstanceSpec {
  int m = 4;
  int n = 4;
  int r = 2;
  Regime regime = Regime::StableSmall;
  ComplementMode complement_mode = ComplementMode::Orthogonal;
  std::uint64_t seed = 0;
  double scale = 0.1;
};

/// Largest supported dimension for random instances.
inline constexpr int kMaxInstanceDim = 12;

/// Builds T = A B (rank r), a generalized inverse for the requested
/// complements, and a perturbation of the requested regime with
/// ||dT S|| <= scale. Throws InputError for infeasible specs.
PerturbedSystem random_instance(const InstanceSpec& spec);

/// True when no decision margin of the report lies within a factor 10 of its
/// threshold.
bool margin_filter(const AnalysisReport& report);
bool margin_filter(const PerturbedSystem& sys);

struct BatteryFailure {
  std::uint64_t seed = 0;
  std::string regime;
  std::string condition;
  std::vector<NamedMargin> margins;
};

struct RegimeTally {
  int run = 0;
  int excluded = 0;
  int stable = 0;
  int bijective = 0;
};

struct BatteryReport {
  int instances_run = 0;
  int instances_excluded = 0;
  int dl1_agreement_count = 0;
  int dl1_disagreement_count = 0;
  int dl2_checked_count = 0;  ///< kept instances with an invertible carrier map
  int dl2_agreement_count = 0;
  int bij_pair_agreement_count = 0;
  int stable_bijective_count = 0;
  double gi_residual_max = 0.0;       ///< worst relative residual of the built bundles
  double subspace_distance_max = 0.0; ///< worst distance among equalities that should hold
  double projector_gap_max = 0.0;     ///< worst relative Pbar/Qbar formula gap
  double inverse_identity_max = 0.0;
  double c_min = 0.0;                 ///< smallest c over nonzero Q (0 when none)
  std::map<std::string, RegimeTally> per_regime;
  std::vector<BatteryFailure> failures;
};

struct BatteryOptions {
  int count = 0;
  int dims_max = 8;
  std::uint64_t seed = 0;
  std::optional<Regime> regime;  ///< restrict to one regime; cycles all otherwise
  double scale = 0.1;
};

/// Instance spec used for the i-th run of a battery.
InstanceSpec battery_instance_spec(const BatteryOptions& options, int index);

BatteryReport battery(const BatteryOptions& options);
BatteryReport battery(int count, int dims_max, std::uint64_t seed);

}  // namespace stabgi
