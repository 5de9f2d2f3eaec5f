#include "resform/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace resform {

double EmbeddedSpace::total_mass() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s;
}

EmbeddedSpace embed_network(const ResistanceNetwork& net, double mass_scale) {
  if (!net.has_coords()) {
    throw std::invalid_argument("embed_network: network carries no coordinates");
  }
  EmbeddedSpace s;
  s.points = net.coords();
  s.mass.resize(net.vertex_count());
  for (int v = 0; v < net.vertex_count(); ++v) s.mass[v] = mass_scale * net.measure()[v];
  s.root = net.root();
  return s;
}

double euclidean(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  double dx = a[0] - b[0], dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

double hausdorff_distance(const EmbeddedSpace& a, const EmbeddedSpace& b) {
  if (a.points.empty() || b.points.empty()) {
    throw std::invalid_argument("hausdorff: empty point set");
  }
  double worst = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const auto& from = pass == 0 ? a.points : b.points;
    const auto& to = pass == 0 ? b.points : a.points;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, euclidean(p, q));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

namespace {

// Dinic max flow on a bipartite mass-transport graph with double capacities.
class MaxFlow {
 public:
  explicit MaxFlow(int nodes) : head_(nodes, -1) {}

  void add_edge(int u, int v, double cap) {
    edges_.push_back({v, head_[u], cap});
    head_[u] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({u, head_[v], 0.0});
    head_[v] = static_cast<int>(edges_.size()) - 1;
  }

  double run(int s, int t) {
    double flow = 0.0;
    while (bfs(s, t)) {
      iter_ = head_;
      while (true) {
        double pushed = dfs(s, t, std::numeric_limits<double>::infinity());
        if (pushed <= 0.0) break;
        flow += pushed;
      }
    }
    return flow;
  }

 private:
  struct E {
    int to;
    int next;
    double cap;
  };
  static constexpr double kEps = 1e-14;

  bool bfs(int s, int t) {
    level_.assign(head_.size(), -1);
    std::queue<int> q;
    q.push(s);
    level_[s] = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int e = head_[u]; e >= 0; e = edges_[e].next) {
        if (edges_[e].cap > kEps && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          q.push(edges_[e].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(int u, int t, double limit) {
    if (u == t) return limit;
    for (int& e = iter_[u]; e >= 0; e = edges_[e].next) {
      auto& ed = edges_[e];
      if (ed.cap > kEps && level_[ed.to] == level_[u] + 1) {
        double pushed = dfs(ed.to, t, std::min(limit, ed.cap));
        if (pushed > 0.0) {
          ed.cap -= pushed;
          edges_[e ^ 1].cap += pushed;
          return pushed;
        }
      }
    }
    return 0.0;
  }

  std::vector<E> edges_;
  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> iter_;
};

// Max transportable mass when x may serve y iff d(x,y) <= eps.
double transport_flow(const EmbeddedSpace& a, const EmbeddedSpace& b,
                      const std::vector<double>& dist, double eps) {
  const int n = a.size(), m = b.size();
  MaxFlow mf(n + m + 2);
  int src = n + m, dst = n + m + 1;
  for (int i = 0; i < n; ++i) mf.add_edge(src, i, a.mass[i]);
  for (int j = 0; j < m; ++j) mf.add_edge(n + j, dst, b.mass[j]);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (dist[i * m + j] <= eps) mf.add_edge(i, n + j, std::numeric_limits<double>::infinity());
    }
  }
  return mf.run(src, dst);
}

}  // namespace

double prohorov_distance(const EmbeddedSpace& a, const EmbeddedSpace& b) {
  const int n = a.size(), m = b.size();
  if (n == 0 || m == 0) throw std::invalid_argument("prohorov: empty support");
  std::vector<double> dist(static_cast<size_t>(n) * m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) dist[i * m + j] = euclidean(a.points[i], b.points[j]);
  }
  std::vector<double> thresholds = dist;
  thresholds.push_back(0.0);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double big = std::max(a.total_mass(), b.total_mass());
  // deficiency(t) = big - maxflow with edges d <= thresholds[t]; nonincreasing
  // in t while thresholds increase, so max(threshold, deficiency) is minimized
  // where the two cross. Feasible eps in [D_t, D_{t+1}) needs eps >=
  // deficiency(t).
  auto deficiency = [&](int t) {
    return big - transport_flow(a, b, dist, thresholds[t]);
  };
  int lo = 0, hi = static_cast<int>(thresholds.size()) - 1;
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (thresholds[mid] >= deficiency(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (int t = std::max(0, lo - 1); t <= std::min<int>(thresholds.size() - 1, lo + 1); ++t) {
    double candidate = std::max(thresholds[t], std::max(0.0, deficiency(t)));
    bool in_interval = t + 1 >= static_cast<int>(thresholds.size()) ||
                       candidate < thresholds[t + 1];
    if (in_interval) best = std::min(best, candidate);
  }
  return best;
}

double common_embedding_gap(const EmbeddedSpace& a, const EmbeddedSpace& b) {
  return hausdorff_distance(a, b) + prohorov_distance(a, b) +
         euclidean(a.points[a.root], b.points[b.root]);
}

namespace {

// Closed ball about the root; at radius 0 this is the root singleton.
EmbeddedSpace restrict_ball(const EmbeddedSpace& s, double r) {
  EmbeddedSpace out;
  const auto& center = s.points[s.root];
  for (int i = 0; i < s.size(); ++i) {
    if (euclidean(s.points[i], center) <= r) {
      if (i == s.root) out.root = out.size();
      out.points.push_back(s.points[i]);
      out.mass.push_back(s.mass[i]);
    }
  }
  return out;
}

}  // namespace

double gh_vague_gap(const EmbeddedSpace& a, const EmbeddedSpace& b,
                    std::span<const double> r_grid) {
  if (r_grid.size() < 2) throw std::invalid_argument("gh_vague_gap: need a grid");
  std::vector<double> grid(r_grid.begin(), r_grid.end());
  // The integrand jumps exactly where a point enters a root ball; insert those
  // radii so each midpoint evaluation is exact on its interval.
  for (const EmbeddedSpace* s : {&a, &b}) {
    for (const auto& p : s->points) {
      double r = euclidean(p, s->points[s->root]);
      if (r > grid.front() && r < grid.back()) grid.push_back(r);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double acc = 0.0;
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    double mid = 0.5 * (grid[i] + grid[i + 1]);
    EmbeddedSpace ra = restrict_ball(a, mid);
    EmbeddedSpace rb = restrict_ball(b, mid);
    double gap = std::min(1.0, common_embedding_gap(ra, rb));
    acc += (std::exp(-grid[i]) - std::exp(-grid[i + 1])) * gap;
  }
  return acc;
}

NetProjection net_projection(const EmbeddedSpace& space,
                             const std::vector<std::array<double, 2>>& centers,
                             double eps) {
  NetProjection out;
  out.assignment.assign(space.size(), -1);
  out.pushforward.assign(centers.size(), 0.0);
  std::vector<int> uncovered;
  for (int i = 0; i < space.size(); ++i) {
    for (size_t c = 0; c < centers.size(); ++c) {
      if (euclidean(space.points[i], centers[c]) <= eps) {
        out.assignment[i] = static_cast<int>(c);
        break;
      }
    }
    if (out.assignment[i] < 0) {
      uncovered.push_back(i);
    } else {
      out.pushforward[out.assignment[i]] += space.mass[i];
      out.max_displacement = std::max(
          out.max_displacement, euclidean(space.points[i], centers[out.assignment[i]]));
    }
  }
  if (!uncovered.empty()) {
    std::ostringstream msg;
    msg << "net_projection: centers fail to cover " << uncovered.size()
        << " points within eps; uncovered ids:";
    for (int i : uncovered) msg << " " << i;
    throw std::invalid_argument(msg.str());
  }
  return out;
}

VolumeProfile volume_profile(const EmbeddedSpace& space, const std::vector<int>& centers,
                             std::vector<double> radii, double uvd_ratio_bound) {
  if (!std::is_sorted(radii.begin(), radii.end())) {
    throw std::invalid_argument("volume_profile: radii must be ascending");
  }
  VolumeProfile vp;
  vp.centers = centers;
  vp.radii = std::move(radii);
  vp.r0 = std::numeric_limits<double>::infinity();
  vp.r_inf = 0.0;
  for (int i = 0; i < space.size(); ++i) {
    for (int j = i + 1; j < space.size(); ++j) {
      double d = euclidean(space.points[i], space.points[j]);
      vp.r_inf = std::max(vp.r_inf, d);
      if (d > 0.0) vp.r0 = std::min(vp.r0, d);
    }
  }

  auto ball_mass = [&](int center, double r) {
    double s = 0.0;
    for (int i = 0; i < space.size(); ++i) {
      if (euclidean(space.points[i], space.points[center]) < r) s += space.mass[i];
    }
    return s;
  };

  vp.table.resize(centers.size());
  for (size_t c = 0; c < centers.size(); ++c) {
    vp.table[c].reserve(vp.radii.size());
    for (double r : vp.radii) vp.table[c].push_back(ball_mass(centers[c], r));
  }
  vp.fitted.assign(vp.radii.size(), 0.0);
  for (size_t k = 0; k < vp.radii.size(); ++k) {
    for (size_t c = 0; c < centers.size(); ++c) vp.fitted[k] += vp.table[c][k];
    vp.fitted[k] /= static_cast<double>(centers.size());
  }

  vp.doubling_estimate = 0.0;
  for (size_t k = 0; k < vp.radii.size(); ++k) {
    double v1 = vp.fitted[k];
    if (v1 <= 0.0) continue;
    double v2 = 0.0;
    for (int c : centers) v2 += ball_mass(c, 2.0 * vp.radii[k]);
    v2 /= static_cast<double>(centers.size());
    vp.doubling_estimate = std::max(vp.doubling_estimate, v2 / v1);
  }

  vp.uvd_plausible = true;
  for (size_t k = 0; k < vp.radii.size(); ++k) {
    if (vp.radii[k] < vp.r0 || vp.radii[k] > vp.r_inf) continue;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (size_t c = 0; c < centers.size(); ++c) {
      lo = std::min(lo, vp.table[c][k]);
      hi = std::max(hi, vp.table[c][k]);
    }
    if (lo <= 0.0 || hi / lo > uvd_ratio_bound) vp.uvd_plausible = false;
  }
  return vp;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double worst = 0.0;
  size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / sa.size() -
                                     static_cast<double>(j) / sb.size()));
  }
  return worst;
}

double ks_critical_value_5pct(std::size_t n, std::size_t m) {
  return 1.3581015157406195 *
         std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

std::vector<double> local_time_modulus(const LocalTimeField& ltf,
                                       const Eigen::MatrixXd& resistance,
                                       std::span<const double> delta_grid, double t_max) {
  const int n = ltf.vertex_count();
  std::vector<double> deltas(delta_grid.begin(), delta_grid.end());
  std::vector<double> out(deltas.size(), 0.0);

  // Node times of the piecewise-linear local-time paths; |L(y) - L(z)| attains
  // its sup over [0, t_max] at these.
  std::vector<double> nodes;
  for (const auto& seg : ltf.segments()) {
    if (seg.entry <= t_max) nodes.push_back(seg.entry);
    if (seg.exit <= t_max) nodes.push_back(seg.exit);
  }
  nodes.push_back(t_max);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  std::vector<std::vector<double>> lt(n);
  for (int v = 0; v < n; ++v) {
    lt[v].reserve(nodes.size());
    for (double t : nodes) lt[v].push_back(ltf.at(v, t));
  }

  for (int y = 0; y < n; ++y) {
    for (int z = y + 1; z < n; ++z) {
      double sup = 0.0;
      for (size_t k = 0; k < nodes.size(); ++k) {
        sup = std::max(sup, std::abs(lt[y][k] - lt[z][k]));
      }
      double r = resistance(y, z);
      for (size_t d = 0; d < deltas.size(); ++d) {
        if (r <= deltas[d]) out[d] = std::max(out[d], sup);
      }
    }
  }
  return out;
}

}  // namespace resform
