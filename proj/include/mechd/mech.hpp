#pragma once

#include <span>
#include <string>
#include <vector>

#include "mechd/env.hpp"
#include "mechd/ironing.hpp"
#include "mechd/mechanism.hpp"

namespace mechd {

inline constexpr double kClassifyTol = 1e-6;

struct FeasibilityReport {
  double ic_violation = 0.0;        ///< largest downward step of q
  double envelope_violation = 0.0;  ///< max |U - (U_floor + int v(q))|
  double ir_violation = 0.0;        ///< max (U_lf - U)+
  double ls_violation = 0.0;        ///< max (-t)+

  double worst() const;
  bool passes(double tol) const { return worst() <= tol; }
};

struct WelfareBreakdown {
  double weighted_consumer_surplus = 0.0;
  double weighted_profit = 0.0;
  double total = 0.0;
};

enum class RegionKind { PublicOption, Subsidy, PrivateMarket };

std::string to_string(RegionKind k);

struct Region {
  Interval span;
  RegionKind kind;
};

using RegionSegmentation = std::vector<Region>;

/// U = u_floor + int v(q), t = theta v(q) - U on the environment grid.
Mechanism transfers_from_allocation(const Environment& env, std::span<const double> q, double u_floor);
/// Same on arbitrary increasing nodes.
Mechanism transfers_from_allocation(const Environment& env, std::span<const double> theta,
                                    std::span<const double> q, double u_floor);

FeasibilityReport verify_feasibility(const Mechanism& m, const Environment& env, double tol = 1e-6);

WelfareBreakdown welfare(const Mechanism& m, const Environment& env);

RegionSegmentation classify_regions(const Mechanism& m, const Environment& env, double tol = kClassifyTol);
/// Per-node region label consistent with classify_regions.
std::vector<RegionKind> region_labels(const Mechanism& m, const RegionSegmentation& regions);

std::vector<Interval> beneficiaries(const Mechanism& m, const Environment& env, double tol = kClassifyTol);

/// CSV with columns theta,q,t,U,q_lf,U_lf,region; 12 significant digits.
std::string mechanism_to_csv(const Mechanism& m, const Environment& env);
/// Same with the region column taken from a given segmentation.
std::string mechanism_to_csv(const Mechanism& m, const Environment& env, const RegionSegmentation& regions);
/// Parses the columns written above; throws InvalidParameter on schema mismatch.
Mechanism mechanism_from_csv(const std::string& text);

}  // namespace mechd
