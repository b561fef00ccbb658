#pragma once

#include <cstddef>
#include <vector>

#include "mechd/env.hpp"
#include "mechd/mechanism.hpp"

namespace mechd {

inline constexpr std::size_t kOracleGridSize = 2000;
inline constexpr double kOracleTol = 1e-8;

enum class OracleInit {
  LaissezFaire,  ///< nu^LF plus a small increasing ramp
  HalfCap,       ///< constant v(A)/2 plus the same ramp
};

/// Optimum of the discretized planner's program on a quantile-uniform grid of
/// its own. `kkt_residual` is the duality-gap bound of the final barrier stage.
struct OracleSolution {
  std::vector<double> theta;
  std::vector<double> nu;
  std::vector<double> U;
  double u_floor = 0.0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Largest violation of each constraint family at an oracle point.
struct OracleFeasibility {
  double monotone = 0.0;
  double box = 0.0;
  double ir = 0.0;
  double ls = 0.0;
  double envelope = 0.0;
};

/// Log-barrier interior-point method on the variables (nu_i, U_i) with the
/// trapezoid envelope as equality constraints. Throws InvalidParameter for
/// n < 16. Non-convergence within the iteration budget is reported through
/// `converged`, not thrown.
OracleSolution oracle_solve(const Environment& env, std::size_t n = kOracleGridSize, double tol = kOracleTol,
                            OracleInit init = OracleInit::LaissezFaire);

OracleFeasibility oracle_feasibility(const Environment& env, const OracleSolution& s);

/// Oracle point as a mechanism on its own nodes.
Mechanism oracle_mechanism(const Environment& env, const OracleSolution& s);

struct OracleGap {
  double nu_sup = 0.0;     ///< max |nu_oracle - nu_closed_form| at the oracle nodes
  double objective = 0.0;  ///< (W_oracle - W_mechanism) / |W_mechanism|
  OracleSolution oracle;
};

OracleGap oracle_gap(const Environment& env, const Mechanism& closed_form, std::size_t n = kOracleGridSize,
                     double tol = kOracleTol);

}  // namespace mechd
