#include "stabgi/report.hpp"

#include <cmath>

namespace stabgi {

namespace {

// JSON has no infinities; those become null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json condition_to_json(const Condition& c) {
  Json out;
  out["holds"] = c.holds;
  const auto crit = c.critical();
  out["margin"] = crit ? number(crit->margin.value) : Json(nullptr);
  out["threshold"] = crit ? number(crit->margin.threshold) : Json(nullptr);
  out["margin_source"] = crit ? Json(crit->name) : Json(nullptr);
  out["witness"] = c.witness ? vector_to_json(*c.witness) : Json(nullptr);
  return out;
}

Json optional_matrix(const std::optional<Matrix>& M) {
  return M ? matrix_to_json(*M) : Json(nullptr);
}

Json distance_to_json(const SubspaceDistance& d) {
  return {{"value", d.value}, {"dim_mismatch", d.dim_mismatch}};
}

}  // namespace

Json matrix_to_json(const Matrix& M) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) data.push_back(M(i, j));
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw InputError("matrix JSON: data length does not match rows x cols");
  }
  Matrix M(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) M(i, j2) = data[k++].get<double>();
  return M;
}

Json residuals_to_json(const GiResiduals& r) {
  return {{"r1", r.r1},         {"r2", r.r2},       {"idem_P", r.idem_P},
          {"idem_Q", r.idem_Q}, {"scale", r.scale}, {"pass", r.pass}};
}

Json geninv_report(const GiBundle& bundle, Eigen::Index rank) {
  return {{"schema", kReportSchema},
          {"command", "geninv"},
          {"S", matrix_to_json(bundle.S)},
          {"P", matrix_to_json(bundle.P)},
          {"Q", matrix_to_json(bundle.Q)},
          {"residuals", residuals_to_json(bundle.residuals)},
          {"rank", rank},
          {"c", norm_c(bundle)}};
}

Json analysis_report(const AnalysisReport& r) {
  Json out;
  out["schema"] = kReportSchema;
  out["command"] = "analyze";
  out["rank_T"] = r.rank_T;
  out["rank_Tbar"] = r.rank_Tbar;

  const auto& b = r.bijectivity;
  out["bijectivity"] = {
      {"bij_Y", b.bij_Y},
      {"bij_X", b.bij_X},
      {"sigma_min_WY", b.sigma_min_WY},
      {"sigma_min_WX", b.sigma_min_WX},
      {"theta_WY", b.theta_WY},
      {"theta_WX", b.theta_WX},
      {"inverse_identity_residual",
       b.inverse_identity_residual ? Json(*b.inverse_identity_residual) : Json(nullptr)}};

  out["dl1"] = {{"carrier_bijective", condition_to_json(r.dl1.carrier_bijective)},
                {"restricted_bijective", condition_to_json(r.dl1.restricted_bijective)},
                {"decomposition", condition_to_json(r.dl1.decomposition)},
                {"agree", r.dl1.agree()}};

  if (r.dl2) {
    out["dl2"] = {{"stable_intersection", condition_to_json(r.dl2->stable_intersection)},
                  {"gi_of_Tbar", condition_to_json(r.dl2->gi_of_Tbar)},
                  {"null_into_range", condition_to_json(r.dl2->null_into_range)},
                  {"range_transport", condition_to_json(r.dl2->range_transport)},
                  {"null_transport", condition_to_json(r.dl2->null_transport)},
                  {"agree", r.dl2->agree()}};
  } else {
    out["dl2"] = nullptr;
  }

  out["stable"] = r.stable.holds;
  out["stable_witness"] = r.stable.witness ? vector_to_json(*r.stable.witness) : Json(nullptr);

  // G is always reported when it exists; only the certified block vouches for it.
  out["G"] = optional_matrix(r.G);
  out["G_verify"] = r.G_residuals ? residuals_to_json(*r.G_residuals) : Json(nullptr);
  out["G_certified"] = r.G_certified;
  if (r.G_certified && r.projectors) {
    const auto& p = *r.projectors;
    out["certified"] = {{"G", matrix_to_json(*r.G)},
                        {"Pbar", matrix_to_json(p.Pbar)},
                        {"Qbar", matrix_to_json(p.Qbar)},
                        {"pbar_formula_gap", p.pbar_formula_gap},
                        {"qbar_formula_gap", p.qbar_formula_gap},
                        {"pbar_idempotency", p.pbar_idempotency},
                        {"qbar_idempotency", p.qbar_idempotency},
                        {"pbar_range_vs_null_Tbar", distance_to_json(p.pbar_range_vs_null_Tbar)},
                        {"qbar_range_vs_range_Tbar", distance_to_json(p.qbar_range_vs_range_Tbar)},
                        {"scale", p.scale}};
  } else {
    out["certified"] = nullptr;
  }

  const auto& c = r.cor32;
  out["cor32"] = {{"null_meets_range_trivially", c.null_meets_range.holds},
                  {"range_meets_null_trivially", c.range_meets_null.holds},
                  {"decomposition_domain", c.decomposition_domain.holds},
                  {"decomposition_codomain", c.decomposition_codomain.holds},
                  {"implication_1_ok", c.implication_1_ok},
                  {"implication_2_ok", c.implication_2_ok}};

  out["c"] = r.c;
  out["norm_Tplus"] = r.norm_Tplus;
  Json margins = Json::object();
  for (const auto& [name, value] : r.decision_margins) margins[name] = number(value);
  out["decision_margins"] = std::move(margins);
  return out;
}

Json battery_report(const BatteryReport& r, const BatteryOptions& options) {
  Json failures = Json::array();
  for (const auto& f : r.failures) {
    Json margins = Json::object();
    for (const auto& m : f.margins) margins[m.name] = number(m.margin.value);
    failures.push_back(
        {{"seed", f.seed}, {"regime", f.regime}, {"condition", f.condition}, {"margins", margins}});
  }
  Json regimes = Json::object();
  for (const auto& [name, t] : r.per_regime) {
    regimes[name] = {{"run", t.run}, {"excluded", t.excluded}, {"stable", t.stable},
                     {"bijective", t.bijective}};
  }
  return {{"schema", kReportSchema},
          {"command", "battery"},
          {"seed", options.seed},
          {"max_dim", options.dims_max},
          {"regime", options.regime ? Json(to_string(*options.regime)) : Json("all")},
          {"instances_run", r.instances_run},
          {"instances_excluded", r.instances_excluded},
          {"dl1_agreement_count", r.dl1_agreement_count},
          {"dl1_disagreement_count", r.dl1_disagreement_count},
          {"dl2_checked_count", r.dl2_checked_count},
          {"dl2_agreement_count", r.dl2_agreement_count},
          {"bij_pair_agreement_count", r.bij_pair_agreement_count},
          {"stable_bijective_count", r.stable_bijective_count},
          {"gi_residual_max", r.gi_residual_max},
          {"subspace_distance_max", r.subspace_distance_max},
          {"projector_gap_max", r.projector_gap_max},
          {"inverse_identity_max", r.inverse_identity_max},
          {"c_min", r.c_min},
          {"per_regime", regimes},
          {"failures", failures}};
}

Json diag_report(const DiagSpec& spec, const DiagAnalysis& a, const DiagCrossCheck& check,
                 double b) {
  Json out;
  out["schema"] = kReportSchema;
  out["command"] = "diag";
  out["truncation"] = spec.t.truncation();
  out["tail_note"] = spec.t.tail_note();
  out["scope"] = "all quantities describe the finite truncation only";
  out["t"] = spec.t.entries();
  out["d"] = spec.d.entries();
  out["stable"] = a.stable;
  out["unstable_indices"] = a.unstable_indices;
  out["bijective"] = a.bijective;
  out["G_entries"] = a.G_entries ? Json(*a.G_entries) : Json(nullptr);
  out["Tplus_entries"] = diag_gi(spec.t).entries();
  out["range_closed_margin"] =
      a.range_closed_margin ? number(*a.range_closed_margin) : Json(nullptr);
  out["range_closed_margin_semantics"] =
      "min |t_k + d_k| over entries above the zero threshold (truncation proxy)";
  out["c"] = a.c;
  out["b_min"] = a.b_min;
  out["bc"] = a.bc;
  out["bc_below_one"] = a.bc < 1.0;
  out["theta_inv"] = a.theta_inv;
  out["min_carrier"] = a.min_carrier;
  out["b"] = b;
  out["a_min"] = diag_tbound(spec.t, spec.d, b);
  out["cross_validation"] = {{"matrix_stable", check.matrix_stable},
                             {"matrix_bijective", check.matrix_bijective},
                             {"stable_agrees", check.stable_agrees},
                             {"bijective_agrees", check.bijective_agrees},
                             {"G_gap", check.G_gap ? Json(*check.G_gap) : Json(nullptr)},
                             {"agree", check.agree()}};
  return out;
}

}  // namespace stabgi
