#include "stabgi/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace stabgi {

namespace {

Matrix eye(Eigen::Index n) { return Matrix::Identity(n, n); }

double log_gap(const Margin& m) {
  if (!(m.value > 0.0) || !std::isfinite(m.value) || !(m.threshold > 0.0)) {
    return std::numeric_limits<double>::infinity();
  }
  return std::abs(std::log(m.value / m.threshold));
}

// Scale of a map of the form I + X: rounding in forming it is relative to
// max(||W||, 1), so a W that is entirely noise is not mistaken for invertible.
double carrier_scale(double sigma_max) { return std::max(sigma_max, 1.0); }

// sigma_min / carrier_scale against a relative threshold.
Margin invertibility_margin(const Matrix& W, double rel) {
  if (W.size() == 0) return {std::numeric_limits<double>::infinity(), rel};
  const auto ext = singular_extremes(W);
  return {ext.sigma_min / carrier_scale(ext.sigma_max), rel};
}

Margin distance_margin(const SubspaceDistance& d, double tol) { return {d.value, tol}; }

void add(Condition& c, std::string name, Margin m) { c.margins.push_back({std::move(name), m}); }

void add_rank(Condition& c, const std::string& name, const Subspace& s) {
  if (std::isfinite(s.rank_margin().value)) add(c, name + ".rank_cut", s.rank_margin());
}

// Witness for a sum that misses part of the ambient space.
std::optional<Vector> gap_witness(const Subspace& sum_space) {
  const Subspace rest = orthogonal_complement(sum_space);
  if (rest.dim() == 0) return std::nullopt;
  return Vector(rest.basis().col(0));
}

Condition trivial_intersection(const Subspace& U, const Subspace& V, const std::string& name) {
  Condition c;
  auto meet = intersect(U, V);
  c.holds = meet.space.dim() == 0;
  if (std::isfinite(meet.margin.value)) add(c, name, meet.margin);
  c.witness = std::move(meet.witness);
  return c;
}

Condition full_sum(const Subspace& U, const Subspace& V, const std::string& name) {
  Condition c;
  const Subspace s = sum(U, V);
  c.holds = s.dim() == U.ambient_dim();
  if (std::isfinite(s.rank_margin().value)) add(c, name, s.rank_margin());
  if (!c.holds) c.witness = gap_witness(s);
  return c;
}

void merge(Condition& into, const Condition& from) {
  into.margins.insert(into.margins.end(), from.margins.begin(), from.margins.end());
  if (!from.holds && !into.witness && from.witness) into.witness = from.witness;
}

Matrix require_C(const BijectivityCertificate& cert) {
  if (!cert.bij_Y || !cert.C) {
    throw SingularMatrixError("carrier map I + dT S is not invertible", cert.sigma_min_WY);
  }
  return *cert.C;
}

}  // namespace

PerturbedSystem::PerturbedSystem(GiBundle bundle, Matrix dT, Tolerances tol)
    : bundle_(std::move(bundle)),
      dT_(std::move(dT)),
      tol_(tol),
      range_T_(Subspace::trivial(0)),
      null_T_(Subspace::trivial(0)),
      range_S_(Subspace::trivial(0)),
      null_S_(Subspace::trivial(0)),
      range_Tbar_(Subspace::trivial(0)),
      null_Tbar_(Subspace::trivial(0)) {
  if (dT_.rows() != T().rows() || dT_.cols() != T().cols()) {
    throw InputError("perturbation must have the shape of T");
  }
  if (S().rows() != T().cols() || S().cols() != T().rows()) {
    throw InputError("generalized inverse must have the transposed shape of T");
  }
  require_finite(dT_, "dT");
  Tbar_ = T() + dT_;
  Tbar_scale_ = norm2(T()) + norm2(dT_);
  WY_ = eye(rows()) + dT_ * S();
  WX_ = eye(cols()) + S() * dT_;
  range_T_ = Subspace::span(T(), tol_.rank);
  null_T_ = Subspace::null_space(T(), tol_.rank);
  range_S_ = Subspace::span(S(), tol_.rank);
  null_S_ = Subspace::null_space(S(), tol_.rank);
  range_Tbar_ = Subspace::span(Tbar_, tol_.rank, Tbar_scale_);
  null_Tbar_ = Subspace::null_space(Tbar_, tol_.rank, Tbar_scale_);
}

bool Condition::borderline(double band) const {
  return std::any_of(margins.begin(), margins.end(),
                     [band](const NamedMargin& m) { return m.margin.borderline(band); });
}

std::optional<NamedMargin> Condition::critical() const {
  std::optional<NamedMargin> best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (const auto& m : margins) {
    const double g = log_gap(m.margin);
    if (!best || g < best_gap) {
      best = m;
      best_gap = g;
    }
  }
  return best;
}

bool BijectivityCertificate::inverse_identity_ok(double tol) const {
  if (!inverse_identity_residual || !WX_inv) return true;
  return *inverse_identity_residual <= tol * (1.0 + norm2(*WX_inv));
}

BijectivityCertificate bijectivity_pair(const PerturbedSystem& sys) {
  BijectivityCertificate cert;
  const double rel = sys.tol().inverse;
  const auto ey = singular_extremes(sys.WY());
  const auto ex = singular_extremes(sys.WX());
  cert.sigma_min_WY = ey.sigma_min;
  cert.sigma_min_WX = ex.sigma_min;
  cert.theta_WY = rel * carrier_scale(ey.sigma_max);
  cert.theta_WX = rel * carrier_scale(ex.sigma_max);
  cert.margin_WY = invertibility_margin(sys.WY(), rel);
  cert.margin_WX = invertibility_margin(sys.WX(), rel);
  cert.bij_Y = ey.sigma_min > cert.theta_WY;
  cert.bij_X = ex.sigma_min > cert.theta_WX;
  if (cert.bij_Y) cert.C = solve_square(sys.WY(), eye(sys.rows()), rel);
  if (cert.bij_X) cert.WX_inv = solve_square(sys.WX(), eye(sys.cols()), rel);
  if (cert.C && cert.WX_inv) {
    // Inverse of I + S dT written through C = (I + dT S)^-1.
    const Matrix explicit_inv = eye(sys.cols()) - sys.S() * (*cert.C) * sys.dT();
    cert.inverse_identity_residual = norm2(*cert.WX_inv - explicit_inv);
  }
  return cert;
}

bool CarrierConditions::agree() const {
  return carrier_bijective.holds == restricted_bijective.holds &&
         restricted_bijective.holds == decomposition.holds;
}

CarrierConditions dl1_conditions(const PerturbedSystem& sys) {
  CarrierConditions out;
  const double rel = sys.tol().inverse;

  const auto cert = bijectivity_pair(sys);
  add(out.carrier_bijective, "sigma_min(WY)/max(sigma_max,1)", cert.margin_WY);
  out.carrier_bijective.holds = cert.bij_Y;

  const Matrix& B = sys.range_S().basis();
  add_rank(out.restricted_bijective, "R(S)", sys.range_S());
  if (B.cols() == 0) {
    out.restricted_bijective.holds = true;
  } else {
    const Matrix K = B.transpose() * sys.WX() * B;
    const Margin m = invertibility_margin(K, rel);
    add(out.restricted_bijective, "sigma_min(WX|R(S))/max(sigma_max,1)", m);
    out.restricted_bijective.holds = m.value > m.threshold;
  }

  const Subspace image = Subspace::span(sys.Tbar() * B, sys.tol().rank, sys.Tbar_scale());
  Condition& dec = out.decomposition;
  add_rank(dec, "Tbar R(S)", image);
  add_rank(dec, "N(S)", sys.null_S());
  add_rank(dec, "N(Tbar)", sys.null_Tbar());
  const Condition spans = full_sum(image, sys.null_S(), "Tbar R(S) + N(S)");
  const Condition direct = trivial_intersection(image, sys.null_S(), "Tbar R(S) meet N(S)");
  const Condition kernel = trivial_intersection(sys.null_Tbar(), sys.range_S(), "N(Tbar) meet R(S)");
  dec.holds = spans.holds && direct.holds && kernel.holds;
  merge(dec, spans);
  merge(dec, direct);
  merge(dec, kernel);
  return out;
}

Condition stability(const PerturbedSystem& sys) {
  Condition c = trivial_intersection(sys.range_Tbar(), sys.null_S(), "R(Tbar) meet N(S)");
  add_rank(c, "R(Tbar)", sys.range_Tbar());
  add_rank(c, "N(S)", sys.null_S());
  return c;
}

Matrix compute_G(const PerturbedSystem& sys) {
  const auto cert = bijectivity_pair(sys);
  return sys.S() * require_C(cert);
}

double g_two_formula_residual(const PerturbedSystem& sys) {
  const auto cert = bijectivity_pair(sys);
  const Matrix C = require_C(cert);
  if (!cert.WX_inv) throw SingularMatrixError("carrier map I + S dT is not invertible", cert.sigma_min_WX);
  return norm2(sys.S() * C - *cert.WX_inv * sys.S());
}

bool StabilityConditions::agree() const {
  const bool v = stable_intersection.holds;
  return gi_of_Tbar.holds == v && null_into_range.holds == v && range_transport.holds == v &&
         null_transport.holds == v;
}

StabilityConditions dl2_conditions(const PerturbedSystem& sys) {
  const auto cert = bijectivity_pair(sys);
  if (!cert.bij_Y) {
    throw PreconditionError("stability conditions need an invertible carrier map I + dT S");
  }
  const Tolerances& tol = sys.tol();
  const Matrix& C = *cert.C;
  StabilityConditions out;
  out.G = sys.S() * C;

  out.stable_intersection = stability(sys);

  {
    Condition& c = out.gi_of_Tbar;
    out.G_residuals = verify_gi(sys.Tbar(), out.G, tol.gi);
    add(c, "verify_gi(Tbar, G)", {out.G_residuals.worst_relative(), tol.gi});
    const Subspace range_G = Subspace::span(out.G, tol.rank, norm2(sys.S()) * norm2(C));
    const Subspace null_G = Subspace::null_space(out.G, tol.rank, norm2(sys.S()) * norm2(C));
    const auto dr = distance(range_G, sys.range_S());
    const auto dn = distance(null_G, sys.null_S());
    add_rank(c, "R(G)", range_G);
    add_rank(c, "N(G)", null_G);
    add(c, "dist(R(G), R(S))", distance_margin(dr, tol.distance));
    add(c, "dist(N(G), N(S))", distance_margin(dn, tol.distance));
    c.holds = out.G_residuals.pass && dr.equal(tol.distance) && dn.equal(tol.distance);
  }

  const Matrix CTbar = C * sys.Tbar();
  {
    Condition& c = out.null_into_range;
    const Matrix& BN = sys.null_T().basis();
    add_rank(c, "N(T)", sys.null_T());
    add_rank(c, "R(T)", sys.range_T());
    if (BN.cols() == 0) {
      c.holds = true;
    } else {
      const Matrix image = CTbar * BN;
      const double scale = (1.0 + norm2(C)) * (1.0 + sys.Tbar_scale());
      const double res = sys.range_T().residual(image) / scale;
      add(c, "residual(WY^-1 Tbar N(T) off R(T))", {res, tol.distance});
      c.holds = res <= tol.distance;
      if (!c.holds) {
        const Matrix off = image - sys.range_T().projector() * image;
        Eigen::Index col = 0;
        off.colwise().norm().maxCoeff(&col);
        c.witness = Vector(BN.col(col));
      }
    }
  }

  {
    Condition& c = out.range_transport;
    const Subspace moved = Subspace::span(CTbar, tol.rank, norm2(C) * sys.Tbar_scale());
    const auto d = distance(moved, sys.range_T());
    add_rank(c, "WY^-1 R(Tbar)", moved);
    add(c, "dist(WY^-1 R(Tbar), R(T))", distance_margin(d, tol.distance));
    c.holds = d.equal(tol.distance);
  }

  {
    Condition& c = out.null_transport;
    const Matrix WXinv = cert.WX_inv ? *cert.WX_inv : Matrix(eye(sys.cols()) - sys.S() * C * sys.dT());
    const Subspace moved = Subspace::span(WXinv * sys.null_T().basis(), tol.rank, norm2(WXinv));
    const auto d = distance(moved, sys.null_Tbar());
    add_rank(c, "WX^-1 N(T)", moved);
    add_rank(c, "N(Tbar)", sys.null_Tbar());
    add(c, "dist(WX^-1 N(T), N(Tbar))", distance_margin(d, tol.distance));
    c.holds = d.equal(tol.distance);
  }
  return out;
}

bool DecompositionCheck::all_four() const {
  return null_meets_range.holds && range_meets_null.holds && decomposition_domain.holds &&
         decomposition_codomain.holds;
}

DecompositionCheck cor32_check(const PerturbedSystem& sys) {
  DecompositionCheck out;
  out.null_meets_range = trivial_intersection(sys.null_Tbar(), sys.range_S(), "N(Tbar) meet R(S)");
  out.range_meets_null = stability(sys);
  out.decomposition_domain = full_sum(sys.null_Tbar(), sys.range_S(), "N(Tbar) + R(S)");
  out.decomposition_codomain = full_sum(sys.null_S(), sys.range_Tbar(), "N(S) + R(Tbar)");
  out.bij_Y = bijectivity_pair(sys).bij_Y;
  out.stable = out.range_meets_null.holds;
  out.implication_1_ok = !out.all_four() || out.bij_Y;
  out.implication_2_ok = !(out.bij_Y && out.stable) ||
                         (out.decomposition_domain.holds && out.decomposition_codomain.holds);
  return out;
}

PerturbedProjectors perturbed_projectors(const PerturbedSystem& sys) {
  const auto cert = bijectivity_pair(sys);
  if (!cert.bij_Y || !cert.bij_X) {
    throw PreconditionError("perturbed projectors need invertible carrier maps");
  }
  if (!stability(sys).holds) {
    throw PreconditionError("perturbed projectors need a stable perturbation");
  }
  const Matrix& C = *cert.C;
  const Matrix& WXinv = *cert.WX_inv;
  const Matrix G = sys.S() * C;

  PerturbedProjectors out;
  out.Pbar = WXinv * sys.bundle().P * sys.WX();
  out.Qbar = sys.WY() * sys.bundle().Q * C;
  out.pbar_formula_gap = norm2(out.Pbar - (eye(sys.cols()) - G * sys.Tbar()));
  out.qbar_formula_gap = norm2(out.Qbar - sys.Tbar() * G);
  out.pbar_idempotency = norm2(out.Pbar * out.Pbar - out.Pbar);
  out.qbar_idempotency = norm2(out.Qbar * out.Qbar - out.Qbar);
  out.pbar_range_vs_null_Tbar =
      distance(Subspace::span(out.Pbar, sys.tol().rank, 1.0), sys.null_Tbar());
  out.qbar_range_vs_range_Tbar =
      distance(Subspace::span(out.Qbar, sys.tol().rank, 1.0), sys.range_Tbar());
  out.scale = (1.0 + norm2(sys.Tbar())) * (1.0 + norm2(G));
  return out;
}

PrintedQbarComparison printed_qbar_comparison(const PerturbedSystem& sys) {
  const auto cert = bijectivity_pair(sys);
  const Matrix C = require_C(cert);
  const Matrix TbarG = sys.Tbar() * sys.S() * C;
  PrintedQbarComparison out;
  out.corrected_gap = norm2(sys.WY() * sys.bundle().Q * C - TbarG);
  out.shape_consistent = sys.rows() == sys.cols();
  if (out.shape_consistent) {
    const Matrix printed = sys.WY() * sys.S() * C;
    out.printed_gap = norm2(printed - TbarG);
    out.printed_idempotency = norm2(printed * printed - printed);
  }
  return out;
}

bool norm_condition(const PerturbedSystem& sys, double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw InputError("norm_condition: a and b must be nonnegative");
  return a * norm2(sys.S()) + b * norm2(sys.bundle().Q) < 1.0;
}

MinimalA minimal_a(const PerturbedSystem& sys, double b, int starts, std::uint64_t seed) {
  return minimal_a(sys.T(), sys.dT(), b, starts, seed);
}

MinimalA minimal_a(const Matrix& T, const Matrix& dT, double b, int starts, std::uint64_t seed) {
  if (!(b >= 0.0)) throw InputError("minimal_a: b must be nonnegative");
  if (T.rows() != dT.rows() || T.cols() != dT.cols()) throw InputError("minimal_a: shape mismatch");
  if (starts < 0) throw InputError("minimal_a: negative start count");
  const Eigen::Index n = T.cols();
  const Matrix A = dT.transpose() * dT;
  const Matrix B = T.transpose() * T;

  auto value = [b](double xax, double xbx) {
    return std::sqrt(std::max(0.0, xax)) - b * std::sqrt(std::max(0.0, xbx));
  };
  // Ascent along great circles x cos(th) + u sin(th), u a unit tangent. With
  // A x, B x carried along and A u, B u computed once per iteration, every
  // trial point costs O(1). Directions are Polak-Ribiere conjugate gradients,
  // reset to the gradient whenever they stop being ascent directions.
  auto ascend = [&](Vector x) {
    Vector Ax = A * x;
    Vector Bx = B * x;
    double fx = value(x.dot(Ax), x.dot(Bx));
    Vector g_prev;
    Vector d_prev;
    for (int it = 0; it < 10000; ++it) {
      const double na = std::sqrt(std::max(0.0, x.dot(Ax)));
      const double nb = std::sqrt(std::max(0.0, x.dot(Bx)));
      Vector g = Vector::Zero(n);
      if (na > 0.0) g += Ax / na;
      if (b > 0.0 && nb > 0.0) g -= (b / nb) * Bx;
      g -= x.dot(g) * x;
      if (g.norm() < 1e-14) break;

      Vector dir = g;
      if (g_prev.size() > 0) {
        const Vector carried = d_prev - x.dot(d_prev) * x;
        const double beta = std::max(0.0, g.dot(g - g_prev) / g_prev.squaredNorm());
        dir = g + beta * carried;
        if (dir.dot(g) <= 0.0) dir = g;
      }
      g_prev = g;
      d_prev = dir;
      const Vector u = dir / dir.norm();
      const Vector Au = A * u;
      const Vector Bu = B * u;
      const double axx = x.dot(Ax), axu = x.dot(Au), auu = u.dot(Au);
      const double bxx = x.dot(Bx), bxu = x.dot(Bu), buu = u.dot(Bu);
      auto along = [&](double th) {
        const double c = std::cos(th), s = std::sin(th);
        return value(c * c * axx + 2 * c * s * axu + s * s * auu,
                     c * c * bxx + 2 * c * s * bxu + s * s * buu);
      };

      constexpr int kGrid = 64;
      const double h = std::numbers::pi / kGrid;
      double best_th = 0.0;
      double best_f = fx;
      for (int k = 1; k < kGrid; ++k) {
        const double f = along(h * k);
        if (f > best_f) {
          best_f = f;
          best_th = h * k;
        }
      }
      double lo = std::max(0.0, best_th - h);
      double hi = best_th + h;
      for (int r = 0; r < 60 && hi - lo > 1e-16; ++r) {
        const double m1 = lo + 0.381966011250105 * (hi - lo);
        const double m2 = hi - 0.381966011250105 * (hi - lo);
        if (along(m1) > along(m2)) hi = m2; else lo = m1;
      }
      const double refined = 0.5 * (lo + hi);
      if (along(refined) > best_f) {
        best_f = along(refined);
        best_th = refined;
      }
      if (!(best_f > fx)) break;

      const double gain = best_f - fx;
      const double c = std::cos(best_th), s = std::sin(best_th);
      x = c * x + s * u;
      Ax = c * Ax + s * Au;
      Bx = c * Bx + s * Bu;
      fx = best_f;
      if (it % 32 == 31) {
        x.normalize();
        Ax = A * x;
        Bx = B * x;
        fx = value(x.dot(Ax), x.dot(Bx));
      }
      if (gain < 1e-12) break;
    }
    x.normalize();
    return std::make_pair(value(x.dot(A * x), x.dot(B * x)), x);
  };

  MinimalA out;
  out.value = 0.0;
  out.argmax = Vector::Zero(n);
  if (n == 0) return out;
  out.argmax(0) = 1.0;
  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& x0) {
    auto [f, x] = ascend(x0);
    if (f > best) {
      best = f;
      out.argmax = x;
    }
  };

  // Right singular vectors of dT: the b = 0 maximizer and its neighbours.
  Eigen::JacobiSVD<Matrix> svd(dT, Eigen::ComputeFullV);
  for (Eigen::Index j = 0; j < n; ++j) consider(svd.matrixV().col(j));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < starts; ++s) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = normal(rng);
    if (x.norm() == 0.0) continue;
    consider(x.normalized());
  }
  out.value = std::max(0.0, best);
  return out;
}

std::vector<NamedMargin> AnalysisReport::all_margins() const {
  std::vector<NamedMargin> out;
  auto push = [&out](const std::string& prefix, const Condition& c) {
    for (const auto& m : c.margins) out.push_back({prefix + "." + m.name, m.margin});
  };
  push("dl1.carrier_bijective", dl1.carrier_bijective);
  push("dl1.restricted_bijective", dl1.restricted_bijective);
  push("dl1.decomposition", dl1.decomposition);
  push("stable", stable);
  if (dl2) {
    push("dl2.stable_intersection", dl2->stable_intersection);
    push("dl2.gi_of_Tbar", dl2->gi_of_Tbar);
    push("dl2.null_into_range", dl2->null_into_range);
    push("dl2.range_transport", dl2->range_transport);
    push("dl2.null_transport", dl2->null_transport);
  }
  push("cor32.null_meets_range", cor32.null_meets_range);
  push("cor32.decomposition_domain", cor32.decomposition_domain);
  push("cor32.decomposition_codomain", cor32.decomposition_codomain);
  out.push_back({"bijectivity.WY", bijectivity.margin_WY});
  out.push_back({"bijectivity.WX", bijectivity.margin_WX});
  return out;
}

AnalysisReport analyze(const PerturbedSystem& sys) {
  AnalysisReport r;
  r.bijectivity = bijectivity_pair(sys);
  r.dl1 = dl1_conditions(sys);
  r.stable = stability(sys);
  r.cor32 = cor32_check(sys);
  r.c = norm_c(sys.bundle());
  r.norm_Tplus = norm2(sys.S());
  r.rank_T = sys.range_T().dim();
  r.rank_Tbar = sys.range_Tbar().dim();
  if (r.bijectivity.bij_Y) {
    r.dl2 = dl2_conditions(sys);
    r.G = r.dl2->G;
    r.G_residuals = r.dl2->G_residuals;
    r.G_certified = r.stable.holds;
    if (r.G_certified && r.bijectivity.bij_X) r.projectors = perturbed_projectors(sys);
  }

  auto record = [&r](const std::string& name, const Condition& c) {
    if (auto crit = c.critical(); crit && std::isfinite(crit->margin.value)) {
      r.decision_margins[name] = crit->margin.value;
    }
  };
  record("dl1.carrier_bijective", r.dl1.carrier_bijective);
  record("dl1.restricted_bijective", r.dl1.restricted_bijective);
  record("dl1.decomposition", r.dl1.decomposition);
  record("stable", r.stable);
  if (r.dl2) {
    record("dl2.stable_intersection", r.dl2->stable_intersection);
    record("dl2.gi_of_Tbar", r.dl2->gi_of_Tbar);
    record("dl2.null_into_range", r.dl2->null_into_range);
    record("dl2.range_transport", r.dl2->range_transport);
    record("dl2.null_transport", r.dl2->null_transport);
  }
  return r;
}

}  // namespace stabgi
