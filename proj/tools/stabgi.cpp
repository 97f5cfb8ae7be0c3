// stabgi: generalized inverses under stable perturbation, from the command line.
//
// Exit codes: 0 success, 1 input/parse error, 2 precondition failure
// (non-complementary subspaces, shape mismatch), 3 verification failure.

#include "stabgi/diagmodel.hpp"
#include "stabgi/geninv.hpp"
#include "stabgi/matrix_io.hpp"
#include "stabgi/oracle.hpp"
#include "stabgi/perturb.hpp"
#include "stabgi/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace stabgi;

enum ExitCode : int { kOk = 0, kInputError = 1, kPrecondition = 2, kVerification = 3 };

struct CommonOptions {
  double tol = 1e-10;
  std::uint64_t seed = 0;
  std::string out;
};

struct ComplementOptions {
  std::string t_path;
  std::string m_path;
  std::string w_path;
  bool moore_penrose = false;
};

void emit(const Json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw InputError("cannot write " + out_path);
  f << text;
}

// Environment first, explicit flags win afterwards (CLI11 only assigns
// options that were given).
void apply_environment(CommonOptions& common) {
  if (const char* s = std::getenv("SPGI_TOL"); s && *s) {
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (*end != '\0' || !(v > 0.0)) throw InputError("SPGI_TOL must be a positive number");
    common.tol = v;
  }
  if (const char* s = std::getenv("SPGI_SEED"); s && *s) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0') throw InputError("SPGI_SEED must be an unsigned integer");
    common.seed = v;
  }
}

Tolerances tolerances(const CommonOptions& common) {
  Tolerances t;
  t.rank = common.tol;
  t.inverse = common.tol;
  t.gi = common.tol;
  return t;
}

GiBundle bundle_from_options(const Matrix& T, const ComplementOptions& opts, double tol) {
  ComplementChoice choice = ComplementChoice::orthogonal(T, tol);
  if (!opts.moore_penrose) {
    if (!opts.m_path.empty()) {
      const Matrix basis = read_matrix_csv(opts.m_path);
      if (basis.rows() != T.cols()) throw ComplementError("--m vectors must live in the domain of T", std::nullopt, 0);
      choice.M = Subspace::span(basis, tol);
    }
    if (!opts.w_path.empty()) {
      const Matrix basis = read_matrix_csv(opts.w_path);
      if (basis.rows() != T.rows()) throw ComplementError("--w vectors must live in the codomain of T", std::nullopt, 0);
      choice.W = Subspace::span(basis, tol);
    }
  }
  return build_gi(T, choice, tol);
}

Json complement_error_json(const char* command, const ComplementError& e) {
  Json j{{"schema", kReportSchema},
         {"command", command},
         {"error", "complement"},
         {"message", e.what()},
         {"dimension_deficit", e.dimension_deficit()}};
  if (e.witness()) {
    Json w = Json::array();
    for (Eigen::Index i = 0; i < e.witness()->size(); ++i) w.push_back((*e.witness())(i));
    j["witness"] = std::move(w);
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

int run_geninv(const CommonOptions& common, const ComplementOptions& opts) {
  const Matrix T = read_matrix_csv(opts.t_path);
  try {
    const GiBundle bundle = bundle_from_options(T, opts, common.tol);
    const auto rank = Subspace::span(T, common.tol).dim();
    emit(geninv_report(bundle, rank), common.out);
    return bundle.residuals.pass ? kOk : kVerification;
  } catch (const ComplementError& e) {
    emit(complement_error_json("geninv", e), common.out);
    std::cerr << "stabgi geninv: " << e.what() << "\n";
    return kPrecondition;
  }
}

int run_analyze(const CommonOptions& common, const ComplementOptions& opts,
                const std::string& dt_path) {
  const Matrix T = read_matrix_csv(opts.t_path);
  const Matrix dT = read_matrix_csv(dt_path);
  if (dT.rows() != T.rows() || dT.cols() != T.cols()) {
    std::cerr << "stabgi analyze: dT is " << dT.rows() << "x" << dT.cols() << " but T is "
              << T.rows() << "x" << T.cols() << "\n";
    return kPrecondition;
  }
  try {
    const PerturbedSystem sys(bundle_from_options(T, opts, common.tol), dT, tolerances(common));
    emit(analysis_report(analyze(sys)), common.out);
    return kOk;
  } catch (const ComplementError& e) {
    emit(complement_error_json("analyze", e), common.out);
    std::cerr << "stabgi analyze: " << e.what() << "\n";
    return kPrecondition;
  }
}

int run_battery(const CommonOptions& common, BatteryOptions options, const std::string& regime) {
  options.seed = common.seed;
  if (!regime.empty() && regime != "all") {
    options.regime = parse_regime(regime);
    if (!options.regime) throw InputError("unknown regime \"" + regime + "\"");
  }
  const BatteryReport report = battery(options);
  emit(battery_report(report, options), common.out);
  if (!report.failures.empty()) {
    std::cerr << "stabgi battery: " << report.failures.size() << " failure(s); seeds:";
    for (const auto& f : report.failures) std::cerr << " " << f.seed;
    std::cerr << "\n";
    return kVerification;
  }
  return kOk;
}

int run_diag(const CommonOptions& common, const std::string& spec_path,
             std::optional<std::size_t> truncate, double b) {
  std::ifstream in(spec_path, std::ios::binary);
  if (!in) throw InputError("cannot open " + spec_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const DiagSpec spec = parse_diag_spec(buf.str(), truncate);
  const DiagAnalysis analysis = diag_analyze(spec.t, spec.d, common.tol);
  const DiagCrossCheck check = cross_validate(spec.t, spec.d, analysis);
  emit(diag_report(spec, analysis, check, b), common.out);
  return check.agree() ? kOk : kVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized inverses and stable perturbations of linear maps"};
  app.require_subcommand(1);

  CommonOptions common;
  ComplementOptions comp;
  std::string dt_path;
  BatteryOptions battery_options;
  std::string regime;
  std::string spec_path;
  std::size_t truncate = 0;
  double b = 0.5;

  try {
    apply_environment(common);
  } catch (const std::exception& e) {
    std::cerr << "stabgi: " << e.what() << "\n";
    return kInputError;
  }

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--tol", common.tol, "Relative rank/invertibility tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", common.seed, "Random seed");
    sub->add_option("--out", common.out, "Output path (default: standard output)");
  };
  auto add_complements = [&](CLI::App* sub) {
    sub->add_option("--t", comp.t_path, "Matrix T (CSV)")->required()->check(CLI::ExistingFile);
    auto* m = sub->add_option("--m", comp.m_path, "Basis of the complement of N(T), columns as vectors")
                  ->check(CLI::ExistingFile);
    auto* w = sub->add_option("--w", comp.w_path, "Basis of the complement of R(T), columns as vectors")
                  ->check(CLI::ExistingFile);
    sub->add_flag("--moore-penrose", comp.moore_penrose, "Use orthogonal complements")
        ->excludes(m)
        ->excludes(w);
  };

  auto* geninv = app.add_subcommand("geninv", "Build a generalized inverse with prescribed complements");
  add_common(geninv);
  add_complements(geninv);

  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze the perturbation T + dT");
  add_common(analyze_cmd);
  add_complements(analyze_cmd);
  analyze_cmd->add_option("--dt", dt_path, "Perturbation dT (CSV)")->required()->check(CLI::ExistingFile);

  auto* battery_cmd = app.add_subcommand("battery", "Run the randomized equivalence battery");
  add_common(battery_cmd);
  battery_cmd->add_option("--instances", battery_options.count, "Number of instances")
      ->check(CLI::NonNegativeNumber);
  battery_cmd->add_option("--max-dim", battery_options.dims_max, "Largest dimension (<= 12)")
      ->check(CLI::Range(1, kMaxInstanceDim));
  battery_cmd->add_option("--regime", regime,
                          "stable-small, rank-increasing, null-hitting, zero-perturbation, "
                          "full-rank or all");
  battery_cmd->add_option("--scale", battery_options.scale, "Perturbation magnitude")
      ->check(CLI::PositiveNumber);

  auto* diag_cmd = app.add_subcommand("diag", "Analyze a truncated diagonal operator pair");
  add_common(diag_cmd);
  diag_cmd->add_option("--spec", spec_path, "Diagonal spec (JSON)")->required()->check(CLI::ExistingFile);
  auto* trunc_opt = diag_cmd->add_option("--truncate", truncate, "Truncation N")->check(CLI::PositiveNumber);
  diag_cmd->add_option("--b", b, "Relative bound b for the minimal a")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*geninv) return run_geninv(common, comp);
    if (*analyze_cmd) return run_analyze(common, comp, dt_path);
    if (*battery_cmd) return run_battery(common, battery_options, regime);
    if (*diag_cmd) {
      std::optional<std::size_t> n;
      if (*trunc_opt) n = truncate;
      return run_diag(common, spec_path, n, b);
    }
  } catch (const InputError& e) {
    std::cerr << "stabgi: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "stabgi: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
