#pragma once

#include <span>
#include <vector>

namespace mechd {

/// Running integral of sampled values: out[i] = int_{x[0]}^{x[i]} y.
/// Each cell uses the trapezoid rule minus the curvature term estimated from
/// neighbouring second divided differences, which is what one Richardson step
/// buys on a uniform grid (fourth order there, third order on ragged grids).
std::vector<double> cumulative_integral(std::span<const double> x, std::span<const double> y);

/// Same rule, total only.
double integral(std::span<const double> x, std::span<const double> y);

/// Trapezoid with a single Richardson step on one cell, given the midpoint.
inline double simpson(double fa, double fm, double fb, double width) {
  return width * (fa + 4.0 * fm + fb) / 6.0;
}

}  // namespace mechd
