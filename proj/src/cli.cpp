#include "ddsdp/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <ostream>

#include "ddsdp/errors.hpp"
#include "ddsdp/problem.hpp"

namespace ddsdp::cli {

namespace {

using nlohmann::json;

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_json(const Mat& x) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < x.cols(); ++j) row.push_back(x(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json phase_json(const PhaseTrace& p) {
  return {{"phase", p.phase},
          {"kind", to_string(p.kind)},
          {"inner_iterations", p.inner_iterations},
          {"cost_before", p.cost_before},
          {"cost_after", p.cost_after},
          {"step_costs", p.step_costs},
          {"logdet", p.logdet},
          {"lambda0", p.lambda0},
          {"tau", p.tau},
          {"t_lo", p.t_lo},
          {"t_hi", p.t_hi},
          {"surrogate", p.surrogate},
          {"eps_c_used", p.eps_c_used},
          {"gap", p.gap},
          {"millis", p.millis}};
}

struct SolveArgs {
  std::string input;
  std::string cone = "sdd";
  int sd = 5;
  double eps_g = 1e-3;
  double eps_c = 1e-2;
  int max_phases = 500;
  std::string trace;
  std::string report;
};

struct GenerateArgs {
  long n = 0;
  long m = 0;
  std::uint64_t seed = 0;
  std::string output;
};

int exit_code(const SolveReport& report) {
  switch (report.reason) {
    case TerminationReason::kGapReached:
      return kExitOk;
    case TerminationReason::kMaxPhases:
      return kExitBudget;
    case TerminationReason::kSubproblemFailure:
      return report.budget_exhausted ? kExitBudget : kExitNumerical;
    case TerminationReason::kUnbounded:
      return kExitNumerical;
  }
  return kExitNumerical;
}

int do_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const RawSdp raw = load_sdpa(a.input);
  const NormalizedSdp norm = normalize(raw);
  Mat x0;
  try {
    x0 = phase1_init(norm);
  } catch (const NoInteriorPointFound& e) {
    err << "error: " << e.what() << " (the problem may lack a strictly feasible point)\n";
    return kExitInput;
  }

  SolverConfig cfg;
  cfg.cone = a.cone == "dd" ? ConeKind::kDD : ConeKind::kSDD;
  cfg.s_d = a.sd;
  cfg.eps_g = a.eps_g;
  cfg.eps_c = a.eps_c;
  cfg.max_phases = a.max_phases;
  if (cfg.eps_c_floor > cfg.eps_c) cfg.eps_c_floor = cfg.eps_c;

  std::unique_ptr<std::ofstream> trace;
  if (!a.trace.empty()) {
    trace = std::make_unique<std::ofstream>(a.trace);
    if (!*trace) throw InputError("cannot open trace file " + a.trace);
    *trace << kTraceHeader << '\n';
    cfg.sink = [&trace](const TraceRecord& r) {
      if (!r.boundary) *trace << trace_row(r) << '\n';
    };
  }

  const SolveReport report = solve(norm, x0, cfg);
  const long phases = report.phases.empty() ? 0 : report.phases.back().phase;

  if (!a.report.empty()) {
    json doc;
    doc["schema"] = "report-v1";
    doc["problem"] = {{"name", raw.name}, {"n", raw.n}, {"m", raw.m}};
    doc["config"] = {{"cone", a.cone}, {"s_d", a.sd}, {"eps_g", a.eps_g}, {"eps_c", a.eps_c},
                     {"max_phases", a.max_phases}, {"alpha", cfg.ls.alpha}, {"beta", cfg.ls.beta}};
    doc["objective"] = report.objective;
    doc["sdpa_objective"] = -report.objective;
    doc["normalized_cost"] = report.normalized_cost;
    doc["certified_gap"] = report.certified_gap;
    doc["normalized_gap"] = report.normalized_gap;
    doc["reason"] = to_string(report.reason);
    doc["message"] = report.message;
    doc["phases_completed"] = phases;
    doc["total_inner_iterations"] = report.total_inner_iterations;
    doc["millis"] = report.millis;
    const TheoryConstants& k = report.constants;
    doc["constants"] = {{"Phi", k.Phi},         {"PhiPrime", k.PhiPrime}, {"xi", k.xi},
                        {"eta", k.eta},         {"chi_hat", k.chi_hat},   {"kappa_hat", k.kappa_hat},
                        {"L_hat", k.L_hat},     {"eps_c_star", k.eps_c_star},
                        {"Theta_hat", k.Theta_hat}, {"empirical", {"chi_hat", "kappa_hat", "Theta_hat", "L_hat"}}};
    json list = json::array();
    for (const PhaseTrace& p : report.phases) list.push_back(phase_json(p));
    doc["phase_traces"] = std::move(list);
    doc["x"] = matrix_json(report.x);
    std::ofstream f(a.report);
    if (!f) throw InputError("cannot open report file " + a.report);
    f << doc.dump(2) << '\n';
  }

  char line[256];
  std::snprintf(line, sizeof line, "objective=%.10g gap=%.6g phases=%ld reason=%s", report.objective,
                report.certified_gap, phases, to_string(report.reason).c_str());
  out << line << '\n';
  out << "sdpa_objective=" << num(-report.objective) << " eps_c_star=" << num(report.constants.eps_c_star) << '\n';
  if (!report.message.empty()) err << report.message << '\n';
  return exit_code(report);
}

int do_generate(const GenerateArgs& a, std::ostream& out) {
  const RawSdp raw = random_sdp(a.n, a.m, a.seed);
  std::ofstream f(a.output);
  if (!f) throw InputError("cannot open output file " + a.output);
  write_sdpa(raw, f);
  out << "wrote " << a.output << " N=" << raw.n << " M=" << raw.m << '\n';
  return kExitOk;
}

int do_check(const std::string& path, std::ostream& out) {
  const RawSdp raw = load_sdpa(path);
  out << "N=" << raw.n << " M=" << raw.m << " blocks=" << raw.block_structure.size() << '\n';
  return kExitOk;
}

}  // namespace

std::string trace_row(const TraceRecord& r) {
  return std::to_string(r.phase) + ',' + to_string(r.kind) + ',' + std::to_string(r.inner_iter) + ',' + num(r.cost) +
         ',' + num(r.lambda0) + ',' + num(r.tau) + ',' + num(r.t_lo) + ',' + num(r.t_hi) + ',' + num(r.gap) + ',' +
         num(r.millis);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"DD/SDD decrease-and-center SDP solver"};
  app.require_subcommand(1);

  SolveArgs sa;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve an SDPA sparse-format problem");
  solve_cmd->add_option("input", sa.input, "problem file (.dat-s)")->required();
  solve_cmd->add_option("--cone", sa.cone, "cone for the subproblems")->check(CLI::IsMember({"dd", "sdd"}));
  solve_cmd->add_option("--sd", sa.sd, "decrease steps per phase")->check(CLI::Range(1, 1000));
  solve_cmd->add_option("--eps-g", sa.eps_g, "target duality gap")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--eps-c", sa.eps_c, "centering gap target")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--max-phases", sa.max_phases, "outer phase budget")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--trace", sa.trace, "CSV trace output");
  solve_cmd->add_option("--report", sa.report, "JSON report output");

  GenerateArgs ga;
  CLI::App* gen_cmd = app.add_subcommand("generate", "write a random instance in SDPA format");
  gen_cmd->add_option("--n", ga.n, "matrix order")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--m", ga.m, "number of constraints")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", ga.seed, "RNG seed")->required();
  gen_cmd->add_option("-o,--output", ga.output, "output path")->required();

  std::string check_path;
  CLI::App* check_cmd = app.add_subcommand("check", "validate a problem file");
  check_cmd->add_option("input", check_path, "problem file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*solve_cmd) return do_solve(sa, out, err);
    if (*gen_cmd) return do_generate(ga, out);
    if (*check_cmd) return do_check(check_path, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const RankDeficientConstraints& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const TooManyConstraints& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InfeasibleStart& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInput;
}

}  // namespace ddsdp::cli
