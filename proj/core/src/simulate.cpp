#include "resform/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace resform {

namespace {

inline int pick_neighbor(const ResistanceNetwork::NeighborRange& nb, double u) {
  double target = u * nb.cumulative[nb.n - 1];
  int k = 0;
  while (k + 1 < nb.n && nb.cumulative[k] <= target) ++k;
  return nb.ids[k];
}

}  // namespace

int Trajectory::state_at(double t) const {
  if (t < 0.0 || t > horizon) throw std::out_of_range("Trajectory::state_at");
  auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  return states[static_cast<int>(it - jump_times.begin()) - 1];
}

Trajectory simulate_vsrw(const ResistanceNetwork& net, int start, double horizon,
                         CounterRng& rng, std::uint64_t max_events) {
  if (horizon <= 0.0) throw std::invalid_argument("simulate_vsrw: horizon must be > 0");
  if (start < 0 || start >= net.vertex_count()) {
    throw std::invalid_argument("simulate_vsrw: bad start vertex");
  }
  net.require_positive_measure();

  Trajectory traj;
  traj.jump_times.push_back(0.0);
  traj.states.push_back(start);
  traj.horizon = horizon;

  double t = 0.0;
  int x = start;
  std::uint64_t events = 0;
  while (true) {
    double rate = net.vertex_conductance(x) / net.measure()[x];
    double hold = rng.exponential(rate);
    if (t + hold >= horizon) break;
    t += hold;
    x = pick_neighbor(net.neighbors(x), rng.uniform());
    traj.jump_times.push_back(t);
    traj.states.push_back(x);
    if (++events >= max_events) {
      traj.truncated = true;
      traj.horizon = t;
      break;
    }
  }
  return traj;
}

Trajectory csrw(const ResistanceNetwork& net, int start, double horizon,
                CounterRng& rng, std::uint64_t max_events) {
  std::vector<double> nu(net.vertex_count());
  for (int v = 0; v < net.vertex_count(); ++v) nu[v] = net.vertex_conductance(v);
  return simulate_vsrw(net.with_measure(std::move(nu)), start, horizon, rng, max_events);
}

LocalTimeField::LocalTimeField(const Trajectory& traj, const ResistanceNetwork& net) {
  const int n = net.vertex_count();
  if (traj.states.empty() || traj.jump_times.size() != traj.states.size()) {
    throw std::invalid_argument("local_times: malformed trajectory");
  }
  for (int s : traj.states) {
    if (s < 0 || s >= n) throw std::invalid_argument("local_times: trajectory/network mismatch");
  }
  mu_ = net.measure();
  horizon_ = traj.horizon;
  entries_.resize(n);
  exits_.resize(n);
  cum_before_.resize(n);

  const int m = static_cast<int>(traj.states.size());
  for (int i = 0; i < m; ++i) {
    double entry = traj.jump_times[i];
    double exit = (i + 1 < m) ? traj.jump_times[i + 1] : traj.horizon;
    int v = traj.states[i];
    entries_[v].push_back(entry);
    exits_[v].push_back(exit);
  }
  for (int v = 0; v < n; ++v) {
    cum_before_[v].resize(entries_[v].size());
    double acc = 0.0;
    for (size_t k = 0; k < entries_[v].size(); ++k) {
      cum_before_[v][k] = acc;
      acc += exits_[v][k] - entries_[v][k];
    }
  }
}

double LocalTimeField::occupation(int vertex, double t) const {
  const auto& en = entries_[vertex];
  if (en.empty()) return 0.0;
  // Last interval with entry < t.
  auto it = std::lower_bound(en.begin(), en.end(), t);
  int k = static_cast<int>(it - en.begin()) - 1;
  if (k < 0) return 0.0;
  return cum_before_[vertex][k] + std::min(t, exits_[vertex][k]) - en[k];
}

double LocalTimeField::at(int vertex, double t) const {
  return occupation(vertex, t) / mu_[vertex];
}

std::vector<LocalTimeField::Segment> LocalTimeField::segments() const {
  std::vector<Segment> segs;
  for (int v = 0; v < vertex_count(); ++v) {
    for (size_t k = 0; k < entries_[v].size(); ++k) {
      segs.push_back({entries_[v][k], exits_[v][k], v});
    }
  }
  std::sort(segs.begin(), segs.end(),
            [](const Segment& a, const Segment& b) { return a.entry < b.entry; });
  return segs;
}

LocalTimeField local_times(const Trajectory& traj, const ResistanceNetwork& net) {
  return LocalTimeField(traj, net);
}

AdditiveFunctional additive_functional(const LocalTimeField& ltf, const VertexMeasure& nu) {
  if (nu.size() != ltf.vertex_count()) {
    throw std::invalid_argument("additive_functional: measure size mismatch");
  }
  auto segs = ltf.segments();
  AdditiveFunctional a;
  a.t_.reserve(segs.size() + 1);
  a.a_.reserve(segs.size() + 1);
  a.t_.push_back(0.0);
  a.a_.push_back(0.0);
  double acc = 0.0;
  for (const auto& s : segs) {
    double slope = nu[s.vertex] / ltf.mu()[s.vertex];
    acc += (s.exit - s.entry) * slope;
    a.t_.push_back(s.exit);
    a.a_.push_back(acc);
  }
  return a;
}

double AdditiveFunctional::value(double t) const {
  if (t <= t_.front()) return a_.front();
  if (t >= t_.back()) return a_.back();
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  int i = static_cast<int>(it - t_.begin());
  double w = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
  return a_[i - 1] + w * (a_[i] - a_[i - 1]);
}

double AdditiveFunctional::inverse(double a) const {
  // First node strictly above a; flat stretches resolve to the later time.
  auto it = std::upper_bound(a_.begin(), a_.end(), a);
  if (it == a_.end()) return std::numeric_limits<double>::infinity();
  int i = static_cast<int>(it - a_.begin());
  if (i == 0) return 0.0;
  double slope = (a_[i] - a_[i - 1]) / (t_[i] - t_[i - 1]);
  return t_[i - 1] + (a - a_[i - 1]) / slope;
}

Trajectory time_change(const Trajectory& traj, const LocalTimeField& ltf,
                       const VertexMeasure& nu, double target_horizon) {
  double nu_total = 0.0;
  for (double w : nu.weights) {
    if (w < 0.0) throw std::invalid_argument("time_change: negative measure weight");
    nu_total += w;
  }
  if (!(nu_total > 0.0)) throw std::invalid_argument("time_change: nu(F) must be positive");

  const int m = static_cast<int>(traj.states.size());
  Trajectory out;
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    double entry = traj.jump_times[i];
    double exit = (i + 1 < m) ? traj.jump_times[i + 1] : traj.horizon;
    int v = traj.states[i];
    double slope = nu[v] / ltf.mu()[v];
    double step = (exit - entry) * slope;
    if (step > 0.0) {
      if (out.states.empty() || out.states.back() != v) {
        out.jump_times.push_back(acc);
        out.states.push_back(v);
      }
      acc += step;
    }
  }
  if (out.states.empty()) {
    // Path never charged supp(nu); X^nu is stuck at tau(0).
    out.jump_times.push_back(0.0);
    out.states.push_back(traj.states.back());
    acc = 0.0;
  }
  out.horizon = acc;
  out.truncated = traj.truncated;
  if (target_horizon >= 0.0) {
    if (target_horizon > acc) {
      out.truncated = true;  // input horizon exhausted first
    } else {
      // Trim to the requested nu-horizon.
      while (out.jump_times.size() > 1 && out.jump_times.back() >= target_horizon) {
        out.jump_times.pop_back();
        out.states.pop_back();
      }
      out.horizon = target_horizon;
    }
  }
  return out;
}

namespace {

// Exact two-state excursion arithmetic for a dominant edge {u,v}. B is the
// generator of the walk killed on leaving the pair,
//   B = [[-a, w/mu_u], [w/mu_v, -d]],
// with a, d the full holding rates. diag(sqrt(mu)) conjugates B to a
// symmetric matrix, so e^{Bt} has a two-term closed form. Every draw based on
// it below is exact in law.
struct PairKernel {
  double exit_rate_u, exit_rate_v;  // external leave rates ext/mu
  double lam1, lam2;                // eigenvalues, 0 > lam1 >= lam2
  // e^{Bt}_{xy} = c1_xy e^{lam1 t} + c2_xy e^{lam2 t}
  double c1_uu, c2_uu, c1_uv, c2_uv, c1_vu, c2_vu, c1_vv, c2_vv;

  PairKernel(double w, double mu_u, double mu_v, double ext_u, double ext_v) {
    double a = (w + ext_u) / mu_u;
    double d = (w + ext_v) / mu_v;
    exit_rate_u = ext_u / mu_u;
    exit_rate_v = ext_v / mu_v;
    double g = w / std::sqrt(mu_u * mu_v);
    double h = 0.5 * (a + d);
    double q = std::sqrt(0.25 * (a - d) * (a - d) + g * g);
    lam1 = -h + q;
    lam2 = -h - q;
    double p1 = a + lam1, p2 = a + lam2;  // sym eigenvectors (g, p_i)
    double n1 = g * g + p1 * p1, n2 = g * g + p2 * p2;
    double k_uv = std::sqrt(mu_u / mu_v);  // undo the symmetrizing conjugation
    c1_uu = g * g / n1;
    c2_uu = g * g / n2;
    c1_vv = p1 * p1 / n1;
    c2_vv = p2 * p2 / n2;
    c1_uv = k_uv * g * p1 / n1;
    c2_uv = k_uv * g * p2 / n2;
    c1_vu = (g * p1 / n1) / k_uv;
    c2_vu = (g * p2 / n2) / k_uv;
  }

  // Row of e^{Bt} from the given side: alive-and-at-u / alive-and-at-v masses.
  void row(bool from_u, double t, double& pu, double& pv) const {
    double e1 = std::exp(lam1 * t);
    double e2 = std::exp(lam2 * t);
    if (from_u) {
      pu = c1_uu * e1 + c2_uu * e2;
      pv = c1_uv * e1 + c2_uv * e2;
    } else {
      pu = c1_vu * e1 + c2_vu * e2;
      pv = c1_vv * e1 + c2_vv * e2;
    }
  }

  double survival(bool from_u, double t) const {
    double pu, pv;
    row(from_u, t, pu, pv);
    return pu + pv;
  }

  // Solve 1 - survival(tau) = target on [0, hi]; monotone, Newton with a
  // bisection bracket.
  double invert_exit_cdf(bool from_u, double target, double hi) const {
    double lo = 0.0, hi_b = hi;
    double tau = 0.5 * hi;
    for (int it = 0; it < 100; ++it) {
      double pu, pv;
      row(from_u, tau, pu, pv);
      double f = (1.0 - pu - pv) - target;
      if (f > 0.0) {
        hi_b = tau;
      } else {
        lo = tau;
      }
      if (hi_b - lo < 1e-15 * hi) break;
      double deriv = -(lam1 * (from_u ? c1_uu + c1_uv : c1_vu + c1_vv) *
                           std::exp(lam1 * tau) +
                       lam2 * (from_u ? c2_uu + c2_uv : c2_vu + c2_vv) *
                           std::exp(lam2 * tau));
      double step = tau - f / deriv;
      tau = (deriv > 0.0 && step > lo && step < hi_b) ? step : 0.5 * (lo + hi_b);
    }
    return tau;
  }
};

}  // namespace

PositionSample sample_positions(const ResistanceNetwork& net, int start,
                                std::span<const double> times, CounterRng& rng,
                                const PositionSampleOptions& opts) {
  net.require_positive_measure();
  const int n = net.vertex_count();
  PositionSample out;
  out.positions.assign(times.size(), start);
  size_t j = 0;
  double t = 0.0;
  int x = start;

  // Per-vertex dominant-edge tables for the collapse path.
  std::vector<int> heavy_nb;
  std::vector<double> heavy_w, ext_rate;
  if (opts.collapse_pairs && n > 2) {
    heavy_nb.assign(n, -1);
    heavy_w.assign(n, 0.0);
    ext_rate.assign(n, 0.0);
    for (int v = 0; v < n; ++v) {
      auto nb = net.neighbors(v);
      int best = -1;
      double bw = 0.0;
      for (int k = 0; k < nb.n; ++k) {
        if (nb.conductance[k] > bw) {
          bw = nb.conductance[k];
          best = nb.ids[k];
        }
      }
      heavy_nb[v] = best;
      heavy_w[v] = bw;
      ext_rate[v] = net.vertex_conductance(v) - bw;
    }
  }

  auto record_until = [&](double segment_end, int state) {
    while (j < times.size() && times[j] < segment_end) out.positions[j++] = state;
  };

  while (j < times.size()) {
    bool collapse = false;
    int partner = -1;
    if (opts.collapse_pairs && n > 2) {
      partner = heavy_nb[x];
      if (partner >= 0 && heavy_nb[partner] == x) {
        double ext = ext_rate[x] + ext_rate[partner];
        if (ext > 0.0 && heavy_w[x] > opts.collapse_factor * ext) collapse = true;
      }
    }

    if (!collapse) {
      double rate = net.vertex_conductance(x) / net.measure()[x];
      double hold = rng.exponential(rate);
      record_until(t + hold, x);
      if (j >= times.size()) break;
      t += hold;
      x = pick_neighbor(net.neighbors(x), rng.uniform());
      if (++out.events >= opts.max_events) {
        out.truncated = true;
        while (j < times.size()) out.positions[j++] = x;
        break;
      }
      continue;
    }

    // Two-state excursion on {x, partner}.
    int u = x, v = partner;
    PairKernel kernel(heavy_w[u], net.measure()[u], net.measure()[v],
                      ext_rate[u], ext_rate[v]);
    bool at_u = true;
    while (true) {
      double g = times[j];
      double delta = g - t;
      double pu, pv;
      kernel.row(at_u, delta, pu, pv);
      double survive = pu + pv;
      if (rng.uniform() < survive) {
        int here = (rng.uniform() * survive < pu) ? u : v;
        out.positions[j++] = here;
        t = g;
        at_u = (here == u);
        if (j >= times.size()) break;
        continue;
      }
      // Exit happens before g; draw its time from the conditional CDF, then
      // the exit side from the instantaneous flux split.
      double target = rng.uniform() * (1.0 - survive);
      double texit = kernel.invert_exit_cdf(at_u, target, delta);
      double qu, qv;
      kernel.row(at_u, texit, qu, qv);
      double flux_u = qu * kernel.exit_rate_u;
      double flux_v = qv * kernel.exit_rate_v;
      int side = (rng.uniform() * (flux_u + flux_v) < flux_u) ? u : v;
      // External neighbor of the exit side, skipping the partner.
      auto nb = net.neighbors(side);
      int other = (side == u) ? v : u;
      double pickv = rng.uniform() * (net.vertex_conductance(side) - heavy_w[u]);
      double run = 0.0;
      int next = -1;
      for (int k = 0; k < nb.n; ++k) {
        if (nb.ids[k] == other) continue;
        run += nb.conductance[k];
        next = nb.ids[k];
        if (run > pickv) break;
      }
      t += texit;
      x = next;
      if (++out.events >= opts.max_events) {
        out.truncated = true;
        while (j < times.size()) out.positions[j++] = x;
      }
      break;  // out of the pair loop, resume the main loop
    }
    if (out.truncated) break;
  }
  return out;
}

PositionSample sample_time_changed_positions(const ResistanceNetwork& net,
                                             const VertexMeasure& nu, int start,
                                             std::span<const double> nu_times,
                                             CounterRng& rng,
                                             const PositionSampleOptions& opts) {
  net.require_positive_measure();
  if (nu.size() != net.vertex_count()) {
    throw std::invalid_argument("sample_time_changed_positions: measure size mismatch");
  }
  if (!(nu.total() > 0.0)) {
    throw std::invalid_argument("sample_time_changed_positions: nu(F) must be positive");
  }
  PositionSample out;
  out.positions.assign(nu_times.size(), start);
  size_t j = 0;
  double clock = 0.0;  // A_t
  int x = start;

  while (j < nu_times.size()) {
    double rate = net.vertex_conductance(x) / net.measure()[x];
    double hold = rng.exponential(rate);
    double clock_end = clock + hold * (nu[x] / net.measure()[x]);
    while (j < nu_times.size() && nu_times[j] < clock_end) out.positions[j++] = x;
    if (j >= nu_times.size()) break;
    clock = clock_end;
    x = pick_neighbor(net.neighbors(x), rng.uniform());
    if (++out.events >= opts.max_events) {
      out.truncated = true;
      while (j < nu_times.size()) out.positions[j++] = x;
      break;
    }
  }
  return out;
}

VertexMeasure accumulate_occupation(const ResistanceNetwork& net, int start,
                                    double horizon, CounterRng& rng,
                                    std::uint64_t max_events) {
  net.require_positive_measure();
  VertexMeasure occ(net.vertex_count(), 0.0);
  double t = 0.0;
  int x = start;
  std::uint64_t events = 0;
  while (true) {
    double rate = net.vertex_conductance(x) / net.measure()[x];
    double hold = rng.exponential(rate);
    if (t + hold >= horizon) {
      occ.weights[x] += horizon - t;
      break;
    }
    occ.weights[x] += hold;
    t += hold;
    x = pick_neighbor(net.neighbors(x), rng.uniform());
    if (++events >= max_events) break;
  }
  return occ;
}

}  // namespace resform
