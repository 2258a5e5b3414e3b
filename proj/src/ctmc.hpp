#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "model.hpp"

namespace asep {

/// A configuration on the lattice [lo, hi]: bit i set means site lo + i occupied.
using ConfigMask = std::uint64_t;
using ConfigDistribution = std::vector<std::pair<ConfigMask, double>>;

struct LatticeWindow {
  long lo = 0;
  long hi = 0;

  int size() const { return static_cast<int>(hi - lo + 1); }
};

inline constexpr int kCtmcMaxSites = 64;
inline constexpr std::size_t kCtmcMaxStates = std::size_t{1} << 22;
inline constexpr double kCtmcTailBound = 1e-13;

/// Point mass on the configuration occupying exactly `sites`.
ConfigDistribution point_mass_initial(const LatticeWindow& lattice, std::span<const long> sites);

/// Bernoulli(rho) product measure on lattice sites in Z+, all other sites empty.
ConfigDistribution bernoulli_initial(const LatticeWindow& lattice, double rho);

/// Law of ASEP with closed boundaries at time t, started from `initial`.
struct ExactLawTable {
  LatticeWindow lattice;
  double t = 0.0;
  std::vector<ConfigMask> configs;
  std::vector<double> law;
  int uniformization_terms = 0;

  double total() const;
  /// P(m-th particle from the left sits at a site <= x); configurations with
  /// fewer than m particles count as x_m > x.
  double prob_position_at_most(int m, long x) const;
  double prob_position_equals(int m, long x) const;
  /// Probability that site x is occupied.
  double occupation(long x) const;
};

/// Uniformization: law(t) = sum_k Poisson(Lambda t; k) law(0) P^k with
/// P = I + Q / Lambda, truncated once the Poisson tail is below 1e-13.
ExactLawTable exact_ctmc_law(const ConfigDistribution& initial, const LatticeWindow& lattice,
                             double t, const ModelParams& params);

}  // namespace asep
