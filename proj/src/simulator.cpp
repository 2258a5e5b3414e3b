#include "simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace asep {

namespace {

// Index set with O(1) insert, erase and uniform selection.
class IndexSet {
 public:
  explicit IndexSet(std::size_t capacity) : where_(capacity, kAbsent) {}

  void set(std::size_t i, bool present) {
    if (present == contains(i)) return;
    if (present) {
      where_[i] = items_.size();
      items_.push_back(i);
    } else {
      const std::size_t slot = where_[i];
      const std::size_t last = items_.back();
      items_[slot] = last;
      where_[last] = slot;
      items_.pop_back();
      where_[i] = kAbsent;
    }
  }

  bool contains(std::size_t i) const { return where_[i] != kAbsent; }
  std::size_t size() const { return items_.size(); }
  std::size_t at(std::size_t k) const { return items_[k]; }

 private:
  static constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> where_;
  std::vector<std::size_t> items_;
};

}  // namespace

LatticeState sample_initial(double rho, long lo, long hi, Rng& rng) {
  require(rho > 0.0 && rho <= 1.0, ErrorCode::Domain, "rho must lie in (0, 1]");
  require(hi >= std::max(lo, 1L), ErrorCode::Domain, "window must meet Z+");
  LatticeState state;
  state.window_lo = lo;
  state.window_hi = hi;
  state.truncated_right = true;
  for (long s = std::max(lo, 1L); s <= hi; ++s)
    if (rng.bernoulli(rho)) state.sites.push_back(s);
  return state;
}

LatticeState sample_initial_particles(double rho, int min_count, long min_last_site, int extra,
                                      Rng& rng) {
  require(rho > 0.0 && rho <= 1.0, ErrorCode::Domain, "rho must lie in (0, 1]");
  require(min_count >= 0 && extra >= 0, ErrorCode::Domain, "particle counts must be >= 0");
  LatticeState state;
  state.window_lo = 1;
  state.truncated_right = true;
  long site = 0;
  auto place_next = [&] {
    do {
      ++site;
    } while (!rng.bernoulli(rho));
    state.sites.push_back(site);
  };
  while (static_cast<int>(state.sites.size()) < min_count || site <= min_last_site) place_next();
  for (int i = 0; i < extra; ++i) place_next();
  state.window_hi = site;
  return state;
}

LatticeState finite_state(std::vector<long> sites) {
  std::sort(sites.begin(), sites.end());
  require(std::adjacent_find(sites.begin(), sites.end()) == sites.end(), ErrorCode::Domain,
          "duplicate sites violate exclusion");
  LatticeState state;
  state.sites = std::move(sites);
  if (!state.sites.empty()) {
    state.window_lo = state.sites.front();
    state.window_hi = state.sites.back();
  }
  return state;
}

Trajectory evolve(const LatticeState& state, double t_end, const ModelParams& params, Rng& rng,
                  const EvolveOptions& options) {
  require(t_end >= state.time, ErrorCode::Domain, "t_end precedes the state time");
  std::vector<double> times = options.snapshot_times;
  require(std::is_sorted(times.begin(), times.end()), ErrorCode::Domain,
          "snapshot times must be increasing");
  require(times.empty() || (times.front() >= state.time && times.back() <= t_end),
          ErrorCode::Domain, "snapshot times outside the evolution interval");
  if (times.empty() || times.back() < t_end) times.push_back(t_end);

  std::vector<long> x = state.sites;
  const std::size_t n = x.size();
  const double p = params.p(), q = params.q();

  auto can_left = [&](std::size_t j) { return j == 0 || x[j - 1] < x[j] - 1; };
  auto can_right = [&](std::size_t j) { return j + 1 == n || x[j + 1] > x[j] + 1; };

  IndexSet left(n), right(n);
  for (std::size_t j = 0; j < n; ++j) {
    left.set(j, q > 0.0 && can_left(j));
    right.set(j, p > 0.0 && can_right(j));
  }
  // Labels >= frontier may differ from the infinite system. Contamination moves
  // one label to the left whenever label frontier-1 attempts a right jump.
  std::size_t frontier = n + 1;
  auto blocked_attempt_rate = [&] {
    if (!state.truncated_right || frontier < 2 || p == 0.0) return 0.0;
    return can_right(frontier - 2) ? 0.0 : p;
  };

  Trajectory traj;
  traj.truncated_right = state.truncated_right;
  auto refresh = [&](std::size_t j) {
    if (j >= n) return;
    left.set(j, q > 0.0 && can_left(j));
    right.set(j, p > 0.0 && can_right(j));
  };

  double now = state.time;
  std::size_t next_snapshot = 0;
  auto take_snapshots_until = [&](double limit) {
    while (next_snapshot < times.size() && times[next_snapshot] <= limit) {
      const int exact = state.truncated_right ? static_cast<int>(frontier) - 1 : static_cast<int>(n);
      traj.snapshots.push_back(Snapshot{times[next_snapshot], x, exact});
      ++next_snapshot;
    }
  };

  while (true) {
    const double left_rate = q * static_cast<double>(left.size());
    const double right_rate = p * static_cast<double>(right.size());
    const double pseudo_rate = blocked_attempt_rate();
    const double total = left_rate + right_rate + pseudo_rate;
    const double next = total > 0.0 ? now + rng.exponential(total)
                                    : std::numeric_limits<double>::infinity();
    if (next > t_end) {
      take_snapshots_until(t_end);
      break;
    }
    take_snapshots_until(std::nextafter(next, -1.0));
    now = next;
    const double u = rng.uniform() * total;
    if (u < left_rate) {
      const std::size_t j = left.at(rng.index(left.size()));
      if (options.record_events) traj.events.push_back(Event{now, x[j], -1});
      --x[j];
      ++traj.event_count;
      if (j > 0) refresh(j - 1);
      refresh(j);
      refresh(j + 1);
    } else if (u < left_rate + right_rate) {
      const std::size_t j = right.at(rng.index(right.size()));
      if (options.record_events) traj.events.push_back(Event{now, x[j], +1});
      ++x[j];
      ++traj.event_count;
      if (state.truncated_right && frontier >= 2 && j == frontier - 2) --frontier;
      if (j > 0) refresh(j - 1);
      refresh(j);
      refresh(j + 1);
    } else {
      --frontier;
    }
  }
  return traj;
}

const Snapshot& snapshot_at(const Trajectory& traj, double t) {
  for (const Snapshot& s : traj.snapshots)
    if (s.time == t) return s;
  fail(ErrorCode::Domain, "no snapshot at the requested time");
}

long observe_position(const Trajectory& traj, int m, double t) {
  const Snapshot& s = snapshot_at(traj, t);
  require(m >= 1 && static_cast<std::size_t>(m) <= s.sites.size(), ErrorCode::Domain,
          "fewer than m particles in the state");
  require(m <= s.exact_labels, ErrorCode::WindowViolation,
          "particle label reached by the truncation front; enlarge the window");
  return s.sites[static_cast<std::size_t>(m - 1)];
}

long observe_current(const Trajectory& traj, long x, double t) {
  const Snapshot& s = snapshot_at(traj, t);
  const auto first_beyond = std::upper_bound(s.sites.begin(), s.sites.end(), x);
  const long count = static_cast<long>(first_beyond - s.sites.begin());
  if (!traj.truncated_right) return count;
  // Exact when a tracked particle sits to the right of x: ordering is
  // preserved, so every untracked particle stays to its right as well.
  require(count < s.exact_labels, ErrorCode::WindowViolation,
          "current observation not covered by the truncation window");
  return count;
}

long poisson_upper_quantile(double mean, double tail) {
  require(mean >= 0.0 && tail > 0.0 && tail < 1.0, ErrorCode::Domain,
          "invalid Poisson quantile request");
  if (mean == 0.0) return 0;
  double log_pmf = -mean;  // k = 0
  double cdf = std::exp(log_pmf);
  long k = 0;
  while (1.0 - cdf > tail) {
    ++k;
    log_pmf += std::log(mean) - std::log(static_cast<double>(k));
    cdf += std::exp(log_pmf);
    if (k > 10 * static_cast<long>(mean) + 1000) break;
  }
  return k;
}

int truncation_margin(const ModelParams& params, double t) {
  return static_cast<int>(poisson_upper_quantile(params.p() * t, 1e-9)) + 1;
}

}  // namespace asep
