#pragma once

#include <cstdint>
#include <vector>

#include "model.hpp"
#include "rng.hpp"

namespace asep {

/// Particle positions in increasing order (the m-th entry is x_{m+1}).
///
/// When `truncated_right` is set the state stands for an infinite system of
/// which only the particles up to window_hi were sampled. The dynamics then
/// track which labels may have felt the missing particles (see Snapshot).
struct LatticeState {
  std::vector<long> sites;
  long window_lo = 1;
  long window_hi = 0;
  double time = 0.0;
  bool truncated_right = false;
};

/// Bernoulli(rho) occupation of every site in [lo, hi] intersected with Z+.
LatticeState sample_initial(double rho, long lo, long hi, Rng& rng);

/// Bernoulli(rho) occupation of Z+ sampled from site 1 until at least
/// `min_count` particles are placed and the last one lies beyond
/// `min_last_site`, followed by `extra` further particles.
LatticeState sample_initial_particles(double rho, int min_count, long min_last_site, int extra,
                                      Rng& rng);

/// Deterministic finite configuration (no truncation).
LatticeState finite_state(std::vector<long> sites);

struct Event {
  double time;
  long site;       // origin of the jump
  int direction;   // +1 right, -1 left
};

struct Snapshot {
  double time;
  std::vector<long> sites;
  /// Labels 1..exact_labels are guaranteed to coincide with the untruncated
  /// system (coupled through the same jump clocks).
  int exact_labels;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<Event> events;
  std::vector<Snapshot> snapshots;
  std::uint64_t event_count = 0;
  bool truncated_right = false;
};

struct EvolveOptions {
  std::vector<double> snapshot_times;  // increasing, within [state.time, t_end]
  bool record_events = false;
};

/// Event-driven (Gillespie) ASEP: right jumps at rate p, left jumps at rate q,
/// suppressed onto occupied sites. A snapshot is always taken at t_end.
Trajectory evolve(const LatticeState& state, double t_end, const ModelParams& params, Rng& rng,
                  const EvolveOptions& options = {});

const Snapshot& snapshot_at(const Trajectory& traj, double t);

/// x_m(t). Error(Domain) if fewer than m particles, Error(WindowViolation) if
/// label m may have been influenced by the truncation.
long observe_position(const Trajectory& traj, int m, double t);

/// T(x, t) = number of particles at sites <= x. Error(WindowViolation) unless
/// some exactly tracked particle lies to the right of x.
long observe_current(const Trajectory& traj, long x, double t);

/// Smallest k with P(Poisson(mean) > k) <= tail.
long poisson_upper_quantile(double mean, double tail);

/// Number of labels the truncation front can cross by time t (tail 1e-9).
int truncation_margin(const ModelParams& params, double t);

}  // namespace asep
