#include "stabgi/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace stabgi {

namespace {

// Relative separation of the smallest nonzero singular value of a drawn T.
constexpr double kRankSeparation = 1e-3;
constexpr int kMaxDraws = 100;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = normal_(rng_);
    return M;
  }

  std::uint64_t next_seed() { return rng_(); }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

Matrix draw_rank_r(Gaussian& g, int m, int n, int r) {
  if (r == 0) return Matrix::Zero(m, n);
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    const Matrix T = g.matrix(m, r) * g.matrix(r, n);
    Eigen::JacobiSVD<Matrix> svd(T);
    const Vector& s = svd.singularValues();
    if (s(r - 1) > kRankSeparation * s(0)) return T;
  }
  throw std::runtime_error("random_instance: could not draw a well-separated rank-r matrix");
}

Matrix eye(Eigen::Index n) { return Matrix::Identity(n, n); }

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::StableSmall: return "stable-small";
    case Regime::RankIncreasing: return "rank-increasing";
    case Regime::NullHitting: return "null-hitting";
    case Regime::ZeroPerturbation: return "zero-perturbation";
    case Regime::FullRank: return "full-rank";
  }
  return "unknown";
}

std::string to_string(ComplementMode c) {
  return c == ComplementMode::Orthogonal ? "orthogonal" : "random-oblique";
}

std::optional<Regime> parse_regime(const std::string& name) {
  for (Regime r : kAllRegimes) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

PerturbedSystem random_instance(const InstanceSpec& spec) {
  const int m = spec.m;
  const int n = spec.n;
  const int r = spec.r;
  if (m < 1 || n < 1 || m > kMaxInstanceDim || n > kMaxInstanceDim) {
    throw InputError("random_instance: dimensions must lie in [1, 12]");
  }
  if (r < 0 || r > std::min(m, n)) throw InputError("random_instance: rank exceeds dimensions");
  if (!(spec.scale > 0.0)) throw InputError("random_instance: scale must be positive");
  const bool needs_deficit =
      spec.regime == Regime::RankIncreasing || spec.regime == Regime::NullHitting;
  if (needs_deficit && r >= std::min(m, n)) {
    throw InputError("random_instance: " + to_string(spec.regime) + " needs r < min(m, n)");
  }
  if (spec.regime == Regime::FullRank && !(m == n && r == m)) {
    throw InputError("random_instance: full-rank needs a square T of full rank");
  }

  Gaussian g(spec.seed);
  const Matrix T = draw_rank_r(g, m, n, r);

  ComplementChoice choice = ComplementChoice::orthogonal(T);
  if (spec.complement_mode == ComplementMode::RandomOblique) {
    const std::uint64_t seed_m = g.next_seed();
    const std::uint64_t seed_w = g.next_seed();
    choice.M = random_complement(Subspace::null_space(T), seed_m);
    choice.W = random_complement(Subspace::span(T), seed_w);
  }
  GiBundle bundle = build_gi(T, choice);
  const Matrix& P = bundle.P;
  const Matrix& Q = bundle.Q;

  Matrix X = Matrix::Zero(m, n);
  switch (spec.regime) {
    case Regime::StableSmall:
      // Range stays inside R(T).
      X = Q * g.matrix(m, n) + T * g.matrix(n, n);
      break;
    case Regime::RankIncreasing:
      X = (eye(m) - Q) * g.matrix(m, n);
      break;
    case Regime::NullHitting:
      // Sends N(T) into N(S); the second term vanishes on N(T).
      X = (eye(m) - Q) * g.matrix(m, n) * P + Q * g.matrix(m, n) * (eye(n) - P);
      break;
    case Regime::ZeroPerturbation:
      break;
    case Regime::FullRank:
      X = g.matrix(m, n);
      break;
  }

  Matrix dT = Matrix::Zero(m, n);
  const double xnorm = norm2(X);
  if (xnorm > 0.0) dT = (spec.scale / (xnorm * std::max(1.0, norm2(bundle.S)))) * X;
  return PerturbedSystem(std::move(bundle), std::move(dT));
}

bool margin_filter(const AnalysisReport& report) {
  for (const auto& m : report.all_margins()) {
    if (m.margin.borderline()) return false;
  }
  return true;
}

bool margin_filter(const PerturbedSystem& sys) { return margin_filter(analyze(sys)); }

InstanceSpec battery_instance_spec(const BatteryOptions& options, int index) {
  if (options.dims_max < 1) throw InputError("battery: max dimension must be positive");
  const int dmax = std::min(options.dims_max, kMaxInstanceDim);
  InstanceSpec spec;
  spec.seed = splitmix64(options.seed + static_cast<std::uint64_t>(index));
  spec.scale = options.scale;
  const int cycle = static_cast<int>(std::size(kAllRegimes));
  if (options.regime) {
    spec.regime = *options.regime;
    spec.complement_mode = index % 2 ? ComplementMode::RandomOblique : ComplementMode::Orthogonal;
  } else {
    spec.regime = kAllRegimes[index % cycle];
    spec.complement_mode =
        (index / cycle) % 2 ? ComplementMode::RandomOblique : ComplementMode::Orthogonal;
  }

  std::mt19937_64 rng(splitmix64(spec.seed ^ 0x5bd1e995ULL));
  auto uniform = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  spec.m = uniform(1, dmax);
  spec.n = spec.regime == Regime::FullRank ? spec.m : uniform(1, dmax);
  const int k = std::min(spec.m, spec.n);
  switch (spec.regime) {
    case Regime::FullRank: spec.r = k; break;
    case Regime::RankIncreasing:
    case Regime::NullHitting: spec.r = uniform(0, k - 1); break;
    default: spec.r = uniform(0, k); break;
  }
  return spec;
}

BatteryReport battery(int count, int dims_max, std::uint64_t seed) {
  BatteryOptions options;
  options.count = count;
  options.dims_max = dims_max;
  options.seed = seed;
  return battery(options);
}

BatteryReport battery(const BatteryOptions& options) {
  BatteryReport report;
  double c_min = std::numeric_limits<double>::infinity();

  for (int i = 0; i < options.count; ++i) {
    const InstanceSpec spec = battery_instance_spec(options, i);
    const std::string regime = to_string(spec.regime);
    RegimeTally& tally = report.per_regime[regime];
    ++report.instances_run;
    ++tally.run;

    const PerturbedSystem sys = random_instance(spec);
    const AnalysisReport a = analyze(sys);
    auto fail = [&](const std::string& what, std::vector<NamedMargin> margins = {}) {
      report.failures.push_back({spec.seed, regime, what, std::move(margins)});
    };
    auto fail_condition = [&](const std::string& what, const Condition& c) {
      fail(what, c.margins);
    };

    // Construction soundness is judged on every instance.
    const GiResiduals& built = sys.bundle().residuals;
    report.gi_residual_max = std::max(report.gi_residual_max, built.worst_relative());
    if (!built.pass) fail("build_gi residuals");
    if (a.rank_T > 0) {
      c_min = std::min(c_min, a.c);
      if (a.c < 1.0 - 1e-10) fail("c >= 1");
    }

    if (!margin_filter(a)) {
      ++report.instances_excluded;
      ++tally.excluded;
      continue;
    }

    const auto& cert = a.bijectivity;
    if (cert.bij_Y) ++tally.bijective;
    if (a.stable.holds) ++tally.stable;

    if (cert.bij_Y == cert.bij_X) {
      ++report.bij_pair_agreement_count;
    } else {
      fail("bij_Y == bij_X", {{"WY", cert.margin_WY}, {"WX", cert.margin_WX}});
    }
    if (cert.inverse_identity_residual) {
      report.inverse_identity_max = std::max(
          report.inverse_identity_max,
          *cert.inverse_identity_residual / (1.0 + norm2(*cert.WX_inv)));
      if (!cert.inverse_identity_ok()) fail("explicit inverse identity");
    }

    if (a.dl1.agree()) {
      ++report.dl1_agreement_count;
    } else {
      ++report.dl1_disagreement_count;
      fail_condition("dl1 agreement", a.dl1.decomposition);
    }

    if (a.dl2) {
      ++report.dl2_checked_count;
      if (a.dl2->agree()) {
        ++report.dl2_agreement_count;
      } else {
        fail_condition("dl2 agreement", a.dl2->stable_intersection);
      }
      if (cert.bij_X) {
        const double gap = g_two_formula_residual(sys);
        if (gap > 1e-9 * (1.0 + norm2(*a.G))) fail("G two-formula identity");
      }
    }

    if (a.bijectivity.bij_Y && a.stable.holds) {
      ++report.stable_bijective_count;
      if (!a.G_residuals->pass) fail("verify_gi(Tbar, G)");
      const Subspace range_G = Subspace::span(*a.G);
      const Subspace null_G = Subspace::null_space(*a.G);
      const auto dr = distance(range_G, sys.range_S());
      const auto dn = distance(null_G, sys.null_S());
      report.subspace_distance_max = std::max({report.subspace_distance_max, dr.value, dn.value});
      if (!dr.equal() || !dn.equal()) fail("R(G) = R(S), N(G) = N(S)");

      if (a.projectors) {
        const auto& pr = *a.projectors;
        const double rel = std::max({pr.pbar_formula_gap, pr.qbar_formula_gap, pr.pbar_idempotency,
                                     pr.qbar_idempotency}) / pr.scale;
        report.projector_gap_max = std::max(report.projector_gap_max, rel);
        if (rel > 1e-9) fail("perturbed projector identities");
        report.subspace_distance_max =
            std::max({report.subspace_distance_max, pr.pbar_range_vs_null_Tbar.value,
                      pr.qbar_range_vs_range_Tbar.value});
        if (!pr.pbar_range_vs_null_Tbar.equal() || !pr.qbar_range_vs_range_Tbar.equal()) {
          fail("R(Pbar) = N(Tbar), R(Qbar) = R(Tbar)");
        }
      } else {
        fail("perturbed projectors missing");
      }
    }

    if (!a.cor32.implication_1_ok) fail("decomposition implication (four conditions => bijective)");
    if (!a.cor32.implication_2_ok) fail("decomposition implication (stable => decompositions)");

    switch (spec.regime) {
      case Regime::StableSmall:
        if (!a.stable.holds) fail_condition("stable-small regime is stable", a.stable);
        break;
      case Regime::RankIncreasing:
        if (a.stable.holds || a.rank_Tbar <= a.rank_T) {
          fail_condition("rank-increasing regime raises rank and is unstable", a.stable);
        }
        break;
      case Regime::NullHitting:
        if (a.stable.holds) fail_condition("null-hitting regime is unstable", a.stable);
        break;
      case Regime::ZeroPerturbation:
        if (!a.stable.holds || !a.dl2 || !a.dl2->gi_of_Tbar.holds) {
          fail("zero perturbation keeps every condition");
        }
        break;
      case Regime::FullRank:
        if (!a.stable.holds || !cert.bij_Y) fail("full-rank regime is stable and bijective");
        break;
    }
  }
  report.c_min = std::isfinite(c_min) ? c_min : 0.0;
  return report;
}

}  // namespace stabgi
