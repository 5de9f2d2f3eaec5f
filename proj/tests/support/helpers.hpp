#pragma once

// Shared test fixtures and independent oracles. Everything here is kept away
// from the library implementation paths it is used to check.

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "resform/metrics.hpp"
#include "resform/network.hpp"
#include "resform/rng.hpp"

namespace testsupport {

// Random connected network: spanning tree plus extra chords, conductances in
// [0.5, 3.0], measure in [0.5, 2.0] (or unit/counting when requested).
inline resform::ResistanceNetwork random_network(int n, int extra_edges,
                                                 std::uint64_t seed,
                                                 bool unit_conductance = false,
                                                 bool counting_measure = false) {
  resform::CounterRng rng(seed, 0);
  std::vector<resform::Edge> edges;
  for (int v = 1; v < n; ++v) {
    int parent = static_cast<int>(rng.uniform() * v);
    double c = unit_conductance ? 1.0 : 0.5 + 2.5 * rng.uniform();
    edges.push_back({parent, v, c});
  }
  for (int k = 0; k < extra_edges; ++k) {
    int u = static_cast<int>(rng.uniform() * n);
    int v = static_cast<int>(rng.uniform() * n);
    if (u == v) continue;
    double c = unit_conductance ? 1.0 : 0.5 + 2.5 * rng.uniform();
    edges.push_back({u, v, c});
  }
  std::vector<double> measure(n);
  for (double& m : measure) m = counting_measure ? 1.0 : 0.5 + 1.5 * rng.uniform();
  return resform::ResistanceNetwork(n, std::move(edges), std::move(measure), 0);
}

inline resform::ResistanceNetwork random_tree(int n, std::uint64_t seed) {
  return random_network(n, 0, seed, true, true);
}

// Unweighted shortest-path distance (the resistance metric on unit trees).
inline int bfs_distance(const resform::ResistanceNetwork& net, int from, int to) {
  std::vector<int> dist(net.vertex_count(), -1);
  std::deque<int> q{from};
  dist[from] = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    if (v == to) return dist[v];
    auto nb = net.neighbors(v);
    for (int k = 0; k < nb.n; ++k) {
      if (dist[nb.ids[k]] < 0) {
        dist[nb.ids[k]] = dist[v] + 1;
        q.push_back(nb.ids[k]);
      }
    }
  }
  return -1;
}

// Brute-force Prohorov distance by subset enumeration; supports of size <= ~12.
inline double prohorov_bruteforce(const resform::EmbeddedSpace& a,
                                  const resform::EmbeddedSpace& b) {
  const int n = a.size(), m = b.size();
  std::vector<double> dist(static_cast<size_t>(n) * m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      dist[i * m + j] = resform::euclidean(a.points[i], b.points[j]);
    }
  }

  auto feasible = [&](double eps) {
    // mu(A) <= nu(A^eps) + eps for all A, and symmetrically.
    for (int pass = 0; pass < 2; ++pass) {
      int big = pass == 0 ? n : m;
      int small = pass == 0 ? m : n;
      const auto& mass_from = pass == 0 ? a.mass : b.mass;
      const auto& mass_to = pass == 0 ? b.mass : a.mass;
      for (int set = 1; set < (1 << big); ++set) {
        double from_mass = 0.0, to_mass = 0.0;
        for (int j = 0; j < small; ++j) {
          bool in_neighborhood = false;
          for (int i = 0; i < big; ++i) {
            if (!(set & (1 << i))) continue;
            double d = pass == 0 ? dist[i * m + j] : dist[j * m + i];
            if (d <= eps) in_neighborhood = true;
          }
          if (in_neighborhood) to_mass += mass_to[j];
        }
        for (int i = 0; i < big; ++i) {
          if (set & (1 << i)) from_mass += mass_from[i];
        }
        if (from_mass > to_mass + eps + 1e-13) return false;
      }
    }
    return true;
  };

  // Candidate set: pairwise distances and every deficiency they induce.
  std::vector<double> candidates{0.0};
  for (double d : dist) candidates.push_back(d);
  std::vector<double> thresholds = candidates;
  std::sort(thresholds.begin(), thresholds.end());
  for (double t : thresholds) {
    for (int pass = 0; pass < 2; ++pass) {
      int big = pass == 0 ? n : m;
      int small = pass == 0 ? m : n;
      const auto& mass_from = pass == 0 ? a.mass : b.mass;
      const auto& mass_to = pass == 0 ? b.mass : a.mass;
      for (int set = 1; set < (1 << big); ++set) {
        double from_mass = 0.0, to_mass = 0.0;
        for (int i = 0; i < big; ++i) {
          if (set & (1 << i)) from_mass += mass_from[i];
        }
        for (int j = 0; j < small; ++j) {
          bool in_nb = false;
          for (int i = 0; i < big; ++i) {
            if (!(set & (1 << i))) continue;
            double d = pass == 0 ? dist[i * m + j] : dist[j * m + i];
            if (d <= t) in_nb = true;
          }
          if (in_nb) to_mass += mass_to[j];
        }
        if (from_mass - to_mass > 0.0) candidates.push_back(from_mass - to_mass);
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (double eps : candidates) {
    if (feasible(eps)) return eps;
  }
  return candidates.back();
}

}  // namespace testsupport
