#pragma once

#include "stabgi/diagmodel.hpp"
#include "stabgi/geninv.hpp"
#include "stabgi/oracle.hpp"
#include "stabgi/perturb.hpp"

#include <json.hpp>

namespace stabgi {

/// Version tag carried by every emitted report.
inline constexpr const char* kReportSchema = "stabgi/1";

using Json = nlohmann::json;

/// {"rows": m, "cols": n, "data": [row-major entries]}.
Json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const Json& j);

Json residuals_to_json(const GiResiduals& r);

/// {S, P, Q, residuals, rank, c} for the geninv command.
Json geninv_report(const GiBundle& bundle, Eigen::Index rank);

Json analysis_report(const AnalysisReport& report);

Json battery_report(const BatteryReport& report, const BatteryOptions& options);

Json diag_report(const DiagSpec& spec, const DiagAnalysis& analysis, const DiagCrossCheck& check,
                 double b);

}  // namespace stabgi
