#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mechd/env.hpp"

namespace mechd {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// A generalized function on the type grid: sampled absolutely continuous part
/// plus a point mass at the lowest type, stored as the total mass it adds to
/// int h dF.
struct ScreeningTransform {
  std::vector<double> base;
  double atom_mass = 0.0;
};

/// Quantile-space cumulative G(z) = int_{F^-1(z)}^{top} h dF sampled at the
/// boundaries of the node cells. Node i owns the quantile cell
/// [z[i], z[i+1]]; the atom sits in g[0].
struct CumulativeProfile {
  std::vector<double> z;
  std::vector<double> g;
};

struct IroningResult {
  std::vector<double> ironed;
  std::vector<Interval> pools;
  std::vector<double> hull;     ///< concave majorant of g at the cell boundaries
  std::vector<double> hull_z;   ///< the cell boundaries themselves
};

/// Quantile mass carried by each node (trapezoid weights in z).
std::vector<double> node_masses(const TypeGrid& grid);

CumulativeProfile cumulative_from_top(const ScreeningTransform& t, const TypeGrid& grid);
CumulativeProfile cumulative_from_top(const ScreeningTransform& t, const Environment& env);

/// Indices of the vertices of the upper concave hull of (x, y), x increasing.
/// Collinear interior points are not vertices.
std::vector<std::size_t> hull_vertices(std::span<const double> x, std::span<const double> y);

/// Least concave majorant of (x, y) evaluated at every x.
std::vector<double> concave_majorant(std::span<const double> x, std::span<const double> y);
/// Same on an equally spaced abscissa over [0, 1].
std::vector<double> concave_majorant(std::span<const double> y);

IroningResult iron(const ScreeningTransform& t, const TypeGrid& grid);
IroningResult iron(const ScreeningTransform& t, const Environment& env);

}  // namespace mechd
