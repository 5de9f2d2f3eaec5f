#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "resform/network.hpp"
#include "resform/rng.hpp"

namespace resform {

// Right-continuous step path: states[i] is occupied on
// [jump_times[i], jump_times[i+1]), the last state up to the horizon.
// jump_times[0] == 0.
struct Trajectory {
  std::vector<double> jump_times;
  std::vector<int> states;
  double horizon = 0.0;
  bool truncated = false;  // event cap hit before the requested horizon

  int jump_count() const { return static_cast<int>(jump_times.size()) - 1; }
  int state_at(double t) const;
};

inline constexpr std::uint64_t kDefaultEventCap = 100'000'000;

// Exact event-driven simulation of the variable speed walk on (net, mu):
// holding time at x is Exp(c(x)/mu(x)), next vertex chosen proportionally to
// edge conductance. Deterministic given the rng state.
Trajectory simulate_vsrw(const ResistanceNetwork& net, int start, double horizon,
                         CounterRng& rng, std::uint64_t max_events = kDefaultEventCap);

// Constant speed walk: jump rate omega_xy / nu(x) with nu the degree measure,
// i.e. unit-mean holding times. Equals the time-change of the VSRW by nu.
Trajectory csrw(const ResistanceNetwork& net, int start, double horizon,
                CounterRng& rng, std::uint64_t max_events = kDefaultEventCap);

// Per-vertex occupation clocks normalized by the speed measure:
// L_t(x) = (time spent at x up to t) / mu(x). Interval lists support O(log)
// queries at arbitrary t.
class LocalTimeField {
 public:
  LocalTimeField(const Trajectory& traj, const ResistanceNetwork& net);

  double at(int vertex, double t) const;          // L_t(x)
  double occupation(int vertex, double t) const;  // unnormalized clock
  double horizon() const { return horizon_; }
  int vertex_count() const { return static_cast<int>(entries_.size()); }

  struct Segment {
    double entry;
    double exit;
    int vertex;
  };
  // Time-ordered holding segments reconstructed from the interval lists.
  std::vector<Segment> segments() const;

  const std::vector<double>& mu() const { return mu_; }

 private:
  std::vector<std::vector<double>> entries_;
  std::vector<std::vector<double>> exits_;
  std::vector<std::vector<double>> cum_before_;  // occupation before interval k
  std::vector<double> mu_;
  double horizon_ = 0.0;
};

LocalTimeField local_times(const Trajectory& traj, const ResistanceNetwork& net);

// Nondecreasing piecewise-linear additive functional A_t = sum_x L_t(x) nu(x).
class AdditiveFunctional {
 public:
  double value(double t) const;
  // Right-continuous inverse tau(a) = inf{s : A_s > a}; +infinity when the
  // functional never exceeds a before the horizon.
  double inverse(double a) const;
  double total() const { return a_.back(); }
  double horizon() const { return t_.back(); }

  const std::vector<double>& node_times() const { return t_; }
  const std::vector<double>& node_values() const { return a_; }

  friend AdditiveFunctional additive_functional(const LocalTimeField&, const VertexMeasure&);

 private:
  std::vector<double> t_;
  std::vector<double> a_;
};

AdditiveFunctional additive_functional(const LocalTimeField& ltf, const VertexMeasure& nu);

// Time-changed path X^nu_t = X_{tau(t)}. Excursions outside supp(nu) collapse
// to jumps. target_horizon < 0 means "as far as the input path allows"; a
// longer request truncates and flags the output.
Trajectory time_change(const Trajectory& traj, const LocalTimeField& ltf,
                       const VertexMeasure& nu, double target_horizon = -1.0);

// --- streaming samplers (no path storage) ---

struct PositionSampleOptions {
  std::uint64_t max_events = kDefaultEventCap;
  // Replace bounce sequences across one dominant edge by exact two-state
  // excursion sampling. Only affects the sampled law's realization path, not
  // the law itself; intended for heavy-tailed conductances.
  bool collapse_pairs = false;
  double collapse_factor = 8.0;
};

struct PositionSample {
  std::vector<int> positions;
  bool truncated = false;
  std::uint64_t events = 0;
};

// X at the given internal times (ascending, within [0, inf)).
PositionSample sample_positions(const ResistanceNetwork& net, int start,
                                std::span<const double> times, CounterRng& rng,
                                const PositionSampleOptions& opts = {});

// X^nu at the given nu-clock times: streams A_t alongside the walk and
// records the current state whenever A crosses a target.
PositionSample sample_time_changed_positions(const ResistanceNetwork& net,
                                             const VertexMeasure& nu, int start,
                                             std::span<const double> nu_times,
                                             CounterRng& rng,
                                             const PositionSampleOptions& opts = {});

// Streaming aggregation fallback: final-horizon occupation clock per vertex,
// path discarded as it is generated.
VertexMeasure accumulate_occupation(const ResistanceNetwork& net, int start,
                                    double horizon, CounterRng& rng,
                                    std::uint64_t max_events = kDefaultEventCap);

}  // namespace resform
