#include "stabgi/diagmodel.hpp"

#include "stabgi/geninv.hpp"
#include "stabgi/perturb.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace stabgi {

namespace {

void require_same_truncation(const DiagonalOperator& t, const DiagonalOperator& d) {
  if (t.truncation() != d.truncation()) throw InputError("diagonal operators have different truncations");
}

}  // namespace

DiagonalOperator::DiagonalOperator(std::vector<double> entries, std::string tail_note)
    : entries_(std::move(entries)), tail_note_(std::move(tail_note)) {
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (!std::isfinite(entries_[k])) throw InputError("diagonal entry is not finite");
    if (std::abs(entries_[k]) <= kZeroPatternTol) zeros_.push_back(k);
  }
}

DiagonalOperator diag_gi(const DiagonalOperator& t) {
  std::vector<double> s(t.truncation(), 0.0);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!t.is_zero(k)) s[k] = 1.0 / t[k];
  }
  return DiagonalOperator(std::move(s), t.tail_note());
}

DiagAnalysis diag_analyze(const DiagonalOperator& t, const DiagonalOperator& d, double inverse_tol) {
  require_same_truncation(t, d);
  DiagAnalysis out;
  const std::size_t N = t.truncation();

  out.stable = true;
  for (std::size_t k : t.zero_pattern()) {
    if (std::abs(d[k]) > kZeroPatternTol) {
      out.stable = false;
      out.unstable_indices.push_back(k);
    }
  }

  // Carrier map I + D T^+ is diagonal: 1 + d_k/t_k off the zero pattern, 1 on
  // it. Its scale is floored at 1, the norm of the identity part.
  double wmax = 1.0;
  out.min_carrier = std::numeric_limits<double>::infinity();
  bool any_nonzero = false;
  for (std::size_t k = 0; k < N; ++k) {
    if (t.is_zero(k)) continue;
    any_nonzero = true;
    const double w = std::abs(1.0 + d[k] / t[k]);
    wmax = std::max(wmax, w);
    out.min_carrier = std::min(out.min_carrier, w);
    out.b_min = std::max(out.b_min, std::abs(d[k] / t[k]));
  }
  out.theta_inv = inverse_tol * wmax;
  out.bijective = !any_nonzero || out.min_carrier > out.theta_inv;
  if (!any_nonzero) out.min_carrier = 1.0;

  if (out.bijective) {
    std::vector<double> g(N, 0.0);
    for (std::size_t k = 0; k < N; ++k) {
      if (!t.is_zero(k)) g[k] = 1.0 / (t[k] + d[k]);
    }
    out.G_entries = std::move(g);
  }

  for (std::size_t k = 0; k < N; ++k) {
    const double v = std::abs(t[k] + d[k]);
    if (v > kZeroPatternTol) {
      out.range_closed_margin = std::min(out.range_closed_margin.value_or(v), v);
    }
  }

  // T T^+ is an orthogonal coordinate projector.
  out.c = any_nonzero ? 1.0 : 0.0;
  out.bc = out.b_min * out.c;
  return out;
}

double diag_tbound(const DiagonalOperator& t, const DiagonalOperator& d, double b) {
  require_same_truncation(t, d);
  if (!(b >= 0.0)) throw InputError("diag_tbound: b must be nonnegative");
  double a = 0.0;
  for (std::size_t k = 0; k < t.truncation(); ++k) {
    a = std::max(a, std::abs(d[k]) - b * std::abs(t[k]));
  }
  return a;
}

Matrix embed(const DiagonalOperator& t) {
  const auto N = static_cast<Eigen::Index>(t.truncation());
  Matrix M = Matrix::Zero(N, N);
  for (Eigen::Index k = 0; k < N; ++k) M(k, k) = t[static_cast<std::size_t>(k)];
  return M;
}

bool DiagCrossCheck::agree(double g_tol) const {
  return stable_agrees && bijective_agrees && (!G_gap || *G_gap <= g_tol);
}

DiagCrossCheck cross_validate(const DiagonalOperator& t, const DiagonalOperator& d,
                              const DiagAnalysis& analysis) {
  require_same_truncation(t, d);
  const PerturbedSystem sys(moore_penrose(embed(t)), embed(d));
  const auto cert = bijectivity_pair(sys);
  DiagCrossCheck out;
  out.matrix_bijective = cert.bij_Y;
  out.matrix_stable = stability(sys).holds;
  out.stable_agrees = out.matrix_stable == analysis.stable;
  out.bijective_agrees = out.matrix_bijective == analysis.bijective;
  if (cert.bij_Y && analysis.G_entries) {
    const Matrix G = sys.S() * (*cert.C);
    double gap = 0.0;
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
      for (Eigen::Index j = 0; j < G.cols(); ++j) {
        if (i == j) {
          const double g = (*analysis.G_entries)[static_cast<std::size_t>(i)];
          gap = std::max(gap, std::abs(G(i, i) - g) / (1.0 + std::abs(g)));
        } else {
          gap = std::max(gap, std::abs(G(i, j)));
        }
      }
    }
    out.G_gap = gap;
  }
  return out;
}

namespace {

std::vector<double> parse_family(const nlohmann::json& j, std::size_t N, const char* which) {
  if (!j.is_object()) throw DiagSpecError(std::string("\"") + which + "\" must be an object");
  const std::string kind = j.value("kind", "");
  if (kind == "explicit") {
    const auto& values = j.at("values");
    if (!values.is_array()) throw DiagSpecError(std::string(which) + ".values must be an array");
    if (values.size() < N) {
      throw DiagSpecError(std::string(which) + ".values has fewer entries than the truncation");
    }
    std::vector<double> out(N);
    for (std::size_t k = 0; k < N; ++k) {
      if (!values[k].is_number()) throw DiagSpecError(std::string(which) + ".values must be numbers");
      out[k] = values[k].get<double>();
    }
    return out;
  }
  if (kind == "formula") {
    const std::string expr = j.value("expr", "");
    const double alpha = j.value("alpha", 1.0);
    std::vector<double> out(N);
    if (expr == "linear") {
      const double beta = j.value("beta", 0.0);
      for (std::size_t k = 0; k < N; ++k) out[k] = alpha * static_cast<double>(k + 1) + beta;
    } else if (expr == "power") {
      const double p = j.value("p", 1.0);
      for (std::size_t k = 0; k < N; ++k) out[k] = alpha * std::pow(static_cast<double>(k + 1), p);
    } else {
      throw DiagSpecError(std::string("unknown formula family \"") + expr + "\" in " + which);
    }
    return out;
  }
  throw DiagSpecError(std::string(which) + ".kind must be \"explicit\" or \"formula\"");
}

}  // namespace

DiagSpec parse_diag_spec(std::string_view json_text, std::optional<std::size_t> truncate) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DiagSpecError(std::string("diagonal spec is not valid JSON: ") + e.what());
  }
  try {
    std::size_t N = 0;
    if (truncate) {
      N = *truncate;
    } else {
      const auto& tr = j.at("truncation");
      if (!tr.is_number_unsigned()) throw DiagSpecError("truncation must be a positive integer");
      N = tr.get<std::size_t>();
    }
    if (N == 0) throw DiagSpecError("truncation must be positive");
    const std::string note = j.value("tail_note", "");
    return {DiagonalOperator(parse_family(j.at("t"), N, "t"), note),
            DiagonalOperator(parse_family(j.at("d"), N, "d"), note)};
  } catch (const nlohmann::json::exception& e) {
    throw DiagSpecError(std::string("malformed diagonal spec: ") + e.what());
  }
}

}  // namespace stabgi
