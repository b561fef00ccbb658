// mechd: batch front end for the mechanism solver.
//
// Exit codes: 0 ok, 1 I/O failure or failed check, 2 invalid config or
// option, 3 solver failure.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <unistd.h>

#include "mechd/analysis.hpp"
#include "mechd/config.hpp"
#include "mechd/errors.hpp"
#include "mechd/mech.hpp"
#include "mechd/oracle.hpp"
#include "mechd/solver.hpp"

namespace {

using nlohmann::ordered_json;
using namespace mechd;

constexpr int kOk = 0;
constexpr int kIoError = 1;
constexpr int kBadInput = 2;
constexpr int kSolverError = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::NoFeasibleMu:
    case ErrorCode::MaxIterations:
    case ErrorCode::NonMonotoneAllocation: return kSolverError;
    default: return kBadInput;
  }
}

// Round to 12 significant digits so the JSON writer emits at most that many.
double r12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Whole-file replace: write next to the target, then rename over it.
void write_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw IoError("cannot write '" + path + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw IoError("cannot write '" + path + "': " + ec.message());
  }
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

// Grid size precedence: --grid, then the config's grid_n, then MECHD_GRID_N.
Environment load_environment(const std::string& path, std::optional<std::size_t> grid) {
  const std::string text = read_file(path);
  EnvConfig cfg = parse_config(text);
  if (grid) {
    cfg.grid_n = *grid;
  } else if (!nlohmann::json::parse(text).contains("grid_n")) {
    if (const char* env = std::getenv("MECHD_GRID_N")) {
      char* end = nullptr;
      const long long n = std::strtoll(env, &end, 10);
      if (end == env || *end != '\0' || n < 2) {
        throw Error(ErrorCode::InvalidParameter, "MECHD_GRID_N must be an integer >= 2");
      }
      cfg.grid_n = static_cast<std::size_t>(n);
    }
  }
  return build_environment(cfg);
}

ordered_json diagnostics_json(const SolverDiagnostics& d) {
  ordered_json j;
  j["intervene"] = d.intervene;
  j["correlation"] = to_string(d.correlation);
  j["mu_star"] = r12(d.mu_star);
  if (d.mu_max) j["mu_max"] = r12(*d.mu_max);
  if (d.theta_H_star) j["theta_H_star"] = r12(*d.theta_H_star);
  if (d.theta_L_star) j["theta_L_star"] = r12(*d.theta_L_star);
  j["welfare"] = {{"lf", r12(d.welfare_lf)}, {"optimal", r12(d.welfare_opt)}, {"gain", r12(d.welfare_gain)}};
  j["regions"] = ordered_json::array();
  for (const auto& r : d.regions) {
    j["regions"].push_back({{"lo", r12(r.span.lo)}, {"hi", r12(r.span.hi)}, {"kind", to_string(r.kind)}});
  }
  j["warnings"] = d.warnings;
  return j;
}

ordered_json feasibility_json(const FeasibilityReport& r) {
  return {{"ic_violation", r12(r.ic_violation)},
          {"envelope_violation", r12(r.envelope_violation)},
          {"ir_violation", r12(r.ir_violation)},
          {"ls_violation", r12(r.ls_violation)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal in-kind redistribution with a private market"};
  app.require_subcommand(1);

  std::string config, out, diag, mech_path, param = "alpha";
  std::optional<std::size_t> grid;
  double tol = 1e-6, from = 0.0, to = 0.0;
  int steps = 0;

  auto* solve_cmd = app.add_subcommand("solve", "Solve for the optimal mechanism");
  solve_cmd->add_option("--config", config, "Environment JSON")->required();
  solve_cmd->add_option("--out", out, "Mechanism CSV (stdout if omitted)");
  solve_cmd->add_option("--diag", diag, "Diagnostics JSON");
  solve_cmd->add_option("--grid", grid, "Type grid size");

  auto* verify_cmd = app.add_subcommand("verify", "Check a mechanism CSV for feasibility");
  verify_cmd->add_option("--config", config, "Environment JSON")->required();
  verify_cmd->add_option("mechanism", mech_path, "Mechanism CSV")->required();
  verify_cmd->add_option("--tol", tol, "Largest tolerated violation");
  verify_cmd->add_option("--out", out, "Report JSON (stdout if omitted)");

  auto* oracle_cmd = app.add_subcommand("oracle", "Compare the closed form with the discretized program");
  oracle_cmd->add_option("--config", config, "Environment JSON")->required();
  oracle_cmd->add_option("--grid", grid, "Oracle grid size (default 2000)");
  oracle_cmd->add_option("--tol", tol, "Barrier duality-gap tolerance (default 1e-8)");
  oracle_cmd->add_option("--out", out, "Gap report JSON (stdout if omitted)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Re-solve over a range of the profit weight");
  sweep_cmd->add_option("--config", config, "Environment JSON")->required();
  sweep_cmd->add_option("--param", param, "Swept parameter (alpha)");
  sweep_cmd->add_option("--from", from, "First value")->required();
  sweep_cmd->add_option("--to", to, "Last value")->required();
  sweep_cmd->add_option("--steps", steps, "Number of values")->required();
  sweep_cmd->add_option("--out", out, "Sweep CSV (stdout if omitted)");
  sweep_cmd->add_option("--grid", grid, "Type grid size");

  auto* lf_cmd = app.add_subcommand("laissez-faire", "Export the laissez-faire benchmark");
  lf_cmd->add_option("--config", config, "Environment JSON")->required();
  lf_cmd->add_option("--out", out, "Mechanism CSV (stdout if omitted)");
  lf_cmd->add_option("--grid", grid, "Type grid size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadInput;
  }

  try {
    if (*solve_cmd) {
      const Environment env = load_environment(config, grid);
      const Solution s = solve(env);
      const std::string csv = mechanism_to_csv(s.mechanism, env, s.diag.regions);
      const std::string js = diagnostics_json(s.diag).dump(2) + "\n";
      emit(out, csv);
      if (!diag.empty()) write_file(diag, js);
      for (const auto& w : s.diag.warnings) std::cerr << "warning: " << w << "\n";
      return kOk;
    }

    if (*verify_cmd) {
      const Environment env = load_environment(config, std::nullopt);
      const Mechanism m = mechanism_from_csv(read_file(mech_path));
      const FeasibilityReport r = verify_feasibility(m, env, tol);
      ordered_json j = feasibility_json(r);
      j["tol"] = tol;
      j["passes"] = r.passes(tol);
      emit(out, j.dump(2) + "\n");
      return r.passes(tol) ? kOk : kIoError;
    }

    if (*oracle_cmd) {
      const std::size_t n = grid.value_or(kOracleGridSize);
      if (n < 16) throw Error(ErrorCode::InvalidParameter, "--grid must be at least 16 for the oracle");
      const double otol = oracle_cmd->count("--tol") ? tol : kOracleTol;
      const Environment env = load_environment(config, std::nullopt);
      const Solution s = solve(env);
      const OracleGap g = oracle_gap(env, s.mechanism, n, otol);
      const OracleFeasibility f = oracle_feasibility(env.with_grid(n), g.oracle);
      const bool ok = std::abs(g.objective) <= 1e-4;
      ordered_json j;
      j["grid"] = n;
      j["nu_sup_gap"] = r12(g.nu_sup);
      j["objective_gap"] = r12(g.objective);
      j["passes"] = ok;
      j["oracle"] = {{"objective", r12(g.oracle.objective)},
                     {"u_floor", r12(g.oracle.u_floor)},
                     {"kkt_residual", r12(g.oracle.kkt_residual)},
                     {"iterations", g.oracle.iterations},
                     {"converged", g.oracle.converged}};
      j["feasibility"] = {{"monotone", r12(f.monotone)}, {"box", r12(f.box)}, {"ir", r12(f.ir)},
                          {"ls", r12(f.ls)},             {"envelope", r12(f.envelope)}};
      if (!g.oracle.converged) {
        std::cerr << "error: MaxIterations: oracle stopped after " << g.oracle.iterations << " Newton steps\n";
        return kSolverError;
      }
      emit(out, j.dump(2) + "\n");
      return ok ? kOk : kIoError;
    }

    if (*sweep_cmd) {
      if (param != "alpha") throw Error(ErrorCode::InvalidParameter, "--param: only 'alpha' can be swept");
      if (steps < 2) throw Error(ErrorCode::InvalidParameter, "--steps must be at least 2");
      if (!(from < to)) throw Error(ErrorCode::InvalidParameter, "--from must be below --to");
      const Environment env = load_environment(config, grid);
      std::vector<double> alphas(static_cast<std::size_t>(steps));
      for (int k = 0; k < steps; ++k) alphas[static_cast<std::size_t>(k)] = from + (to - from) * k / (steps - 1);
      const SweepResult r = alpha_sweep(env, alphas);
      emit(out, sweep_to_csv(r));
      auto yn = [](bool b) { return b ? "true" : "false"; };
      std::ostream& log = (out.empty() || out == "-") ? std::cerr : std::cout;
      log << "mu_star nonincreasing: " << yn(r.mu_nonincreasing) << "\n";
      if (env.correlation() == Correlation::Negative) {
        log << "theta_H nondecreasing: " << yn(r.theta_nondecreasing) << "\n";
      } else {
        log << "theta_L nonincreasing: " << yn(r.theta_nonincreasing) << "\n";
      }
      log << "welfare_gain nonincreasing: " << yn(r.gain_nonincreasing) << "\n";
      return kOk;
    }

    if (*lf_cmd) {
      const Environment env = load_environment(config, grid);
      emit(out, mechanism_to_csv(laissez_faire(env), env));
      return kOk;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return kOk;
}
