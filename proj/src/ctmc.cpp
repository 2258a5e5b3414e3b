#include "ctmc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include "error.hpp"

namespace asep {

namespace {

using Binomials = std::vector<std::vector<std::uint64_t>>;

Binomials binomial_table(int n) {
  Binomials c(n + 1, std::vector<std::uint64_t>(n + 2, 0));
  for (int i = 0; i <= n; ++i) {
    c[i][0] = 1;
    for (int j = 1; j <= i; ++j) c[i][j] = c[i - 1][j - 1] + (j <= i - 1 ? c[i - 1][j] : 0);
  }
  return c;
}

// Colex rank among masks of the same popcount; equals the position of the
// mask in increasing numeric order.
std::uint64_t colex_rank(ConfigMask mask, const Binomials& c) {
  std::uint64_t rank = 0;
  int r = 1;
  while (mask) {
    const int bit = std::countr_zero(mask);
    rank += c[bit][r];
    ++r;
    mask &= mask - 1;
  }
  return rank;
}

void check_lattice(const LatticeWindow& lattice) {
  require(lattice.hi >= lattice.lo, ErrorCode::Domain, "empty lattice window");
  require(lattice.size() <= kCtmcMaxSites, ErrorCode::Unsupported,
          "CTMC oracle limited to 64 sites");
}

// m-th lowest set bit (1-based m), or -1.
int nth_bit(ConfigMask mask, int m) {
  for (int i = 1; i < m && mask; ++i) mask &= mask - 1;
  return mask ? std::countr_zero(mask) : -1;
}

}  // namespace

ConfigDistribution point_mass_initial(const LatticeWindow& lattice, std::span<const long> sites) {
  check_lattice(lattice);
  ConfigMask mask = 0;
  for (long s : sites) {
    require(s >= lattice.lo && s <= lattice.hi, ErrorCode::Domain, "site outside lattice");
    const ConfigMask bit = ConfigMask{1} << (s - lattice.lo);
    require(!(mask & bit), ErrorCode::Domain, "duplicate site in initial configuration");
    mask |= bit;
  }
  return {{mask, 1.0}};
}

ConfigDistribution bernoulli_initial(const LatticeWindow& lattice, double rho) {
  check_lattice(lattice);
  require(rho > 0.0 && rho <= 1.0, ErrorCode::Domain, "rho must lie in (0, 1]");
  std::vector<int> bits;
  for (long s = std::max(1L, lattice.lo); s <= lattice.hi; ++s)
    bits.push_back(static_cast<int>(s - lattice.lo));
  require(bits.size() <= 22, ErrorCode::Unsupported, "Bernoulli support too large");
  ConfigDistribution out;
  const std::size_t n = bits.size();
  for (std::uint64_t sub = 0; sub < (std::uint64_t{1} << n); ++sub) {
    ConfigMask mask = 0;
    int occupied = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (sub & (std::uint64_t{1} << i)) {
        mask |= ConfigMask{1} << bits[i];
        ++occupied;
      }
    const double w = std::pow(rho, occupied) * std::pow(1.0 - rho, static_cast<double>(n) - occupied);
    if (w > 0.0) out.emplace_back(mask, w);
  }
  return out;
}

double ExactLawTable::total() const {
  double s = 0.0;
  for (double v : law) s += v;
  return s;
}

double ExactLawTable::prob_position_at_most(int m, long x) const {
  require(m >= 1, ErrorCode::Domain, "particle index must be >= 1");
  double s = 0.0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const int bit = nth_bit(configs[i], m);
    if (bit >= 0 && lattice.lo + bit <= x) s += law[i];
  }
  return s;
}

double ExactLawTable::prob_position_equals(int m, long x) const {
  require(m >= 1, ErrorCode::Domain, "particle index must be >= 1");
  double s = 0.0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const int bit = nth_bit(configs[i], m);
    if (bit >= 0 && lattice.lo + bit == x) s += law[i];
  }
  return s;
}

double ExactLawTable::occupation(long x) const {
  if (x < lattice.lo || x > lattice.hi) return 0.0;
  const ConfigMask bit = ConfigMask{1} << (x - lattice.lo);
  double s = 0.0;
  for (std::size_t i = 0; i < configs.size(); ++i)
    if (configs[i] & bit) s += law[i];
  return s;
}

ExactLawTable exact_ctmc_law(const ConfigDistribution& initial, const LatticeWindow& lattice,
                             double t, const ModelParams& params) {
  check_lattice(lattice);
  require(t >= 0.0 && std::isfinite(t), ErrorCode::Domain, "time must be nonnegative");
  require(!initial.empty(), ErrorCode::Domain, "empty initial distribution");
  const int sites = lattice.size();
  const Binomials binom = binomial_table(sites);

  // Sectors by particle number, each enumerated in increasing mask order.
  std::map<int, double> sector_mass;
  for (const auto& [mask, w] : initial) {
    require(sites == 64 || (mask >> sites) == 0, ErrorCode::Domain,
            "initial configuration outside lattice");
    sector_mass[std::popcount(mask)] += w;
  }
  std::size_t total_states = 0;
  for (const auto& [n, w] : sector_mass) total_states += binom[sites][n];
  require(total_states <= kCtmcMaxStates, ErrorCode::Unsupported,
          "CTMC state space too large");

  ExactLawTable table;
  table.lattice = lattice;
  table.t = t;
  table.configs.reserve(total_states);
  std::map<int, std::size_t> offset;
  int max_particles = 0;
  for (const auto& [n, w] : sector_mass) {
    offset[n] = table.configs.size();
    max_particles = std::max(max_particles, n);
    const std::size_t count = binom[sites][n];
    if (n == 0) {
      table.configs.push_back(0);
      continue;
    }
    ConfigMask mask = (n == 64) ? ~ConfigMask{0} : (ConfigMask{1} << n) - 1;
    for (std::size_t i = 0; i < count; ++i) {
      table.configs.push_back(mask);
      if (i + 1 == count) break;
      // Gosper's hack: next mask with the same popcount.
      const ConfigMask low = mask & (~mask + 1);
      const ConfigMask ripple = mask + low;
      mask = (((ripple ^ mask) >> 2) / low) | ripple;
    }
  }
  const std::size_t N = table.configs.size();

  std::vector<double> v(N, 0.0);
  for (const auto& [mask, w] : initial) {
    const int n = std::popcount(mask);
    v[offset[n] + colex_rank(mask, binom)] += w;
  }

  const double p = params.p(), q = params.q();
  const double uniform_rate = std::max((p + q) * max_particles, 1e-300);
  const double mean = uniform_rate * t;
  if (mean == 0.0) {
    table.law = std::move(v);
    return table;
  }
  require(mean <= 5000.0, ErrorCode::Precision, "uniformization rate * t too large");

  // Transition lists in CSR form; the high bit of each target marks a right move.
  constexpr std::uint32_t kRightFlag = 0x80000000u;
  std::vector<std::uint32_t> row_start(N + 1, 0);
  std::vector<std::uint32_t> targets;
  std::vector<double> stay(N, 1.0);
  for (std::size_t i = 0; i < N; ++i) {
    const ConfigMask mask = table.configs[i];
    const std::size_t base = offset[std::popcount(mask)];
    const std::uint64_t rank = i - base;
    double exit = 0.0;
    ConfigMask rest = mask;
    int r = 0;  // order of the current particle among occupied bits (0-based)
    while (rest) {
      const int bit = std::countr_zero(rest);
      rest &= rest - 1;
      if (p > 0.0 && bit + 1 < sites && !(mask & (ConfigMask{1} << (bit + 1)))) {
        // Rank shifts by C(bit+1, r+1) - C(bit, r+1) = C(bit, r).
        targets.push_back(static_cast<std::uint32_t>(base + rank + binom[bit][r]) | kRightFlag);
        exit += p;
      }
      if (q > 0.0 && bit > 0 && !(mask & (ConfigMask{1} << (bit - 1)))) {
        targets.push_back(static_cast<std::uint32_t>(base + rank - binom[bit - 1][r]));
        exit += q;
      }
      ++r;
    }
    stay[i] = 1.0 - exit / uniform_rate;
    row_start[i + 1] = static_cast<std::uint32_t>(targets.size());
  }

  const double right_step = p / uniform_rate, left_step = q / uniform_rate;
  std::vector<double> acc(N, 0.0), next(N);
  double cumulative = 0.0;
  const double log_mean = std::log(mean);
  int k = 0;
  for (;; ++k) {
    const double weight = std::exp(-mean + k * log_mean - std::lgamma(k + 1.0));
    cumulative += weight;
    if (weight > 0.0)
      for (std::size_t i = 0; i < N; ++i) acc[i] += weight * v[i];
    if (k >= mean && 1.0 - cumulative <= kCtmcTailBound) break;
    require(k < 20000, ErrorCode::Precision, "uniformization tail bound not reached");
    for (std::size_t i = 0; i < N; ++i) next[i] = stay[i] * v[i];
    for (std::size_t i = 0; i < N; ++i) {
      const double vi = v[i];
      if (vi == 0.0) continue;
      for (std::uint32_t e = row_start[i]; e < row_start[i + 1]; ++e) {
        const std::uint32_t tgt = targets[e];
        if (tgt & kRightFlag)
          next[tgt & ~kRightFlag] += vi * right_step;
        else
          next[tgt] += vi * left_step;
      }
    }
    v.swap(next);
  }
  table.law = std::move(acc);
  table.uniformization_terms = k + 1;
  return table;
}

}  // namespace asep
