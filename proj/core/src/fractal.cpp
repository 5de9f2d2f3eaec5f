#include "resform/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace resform {

std::string CellAddress::to_string() const {
  std::string s;
  for (std::uint8_t letter : word) {
    if (!s.empty()) s.push_back('.');
    s += std::to_string(static_cast<int>(letter));
  }
  return s.empty() ? std::string("()") : s;
}

void FractalScheme::validate() const {
  if (map_count < 2) throw std::invalid_argument("scheme: need at least 2 maps");
  if (beta < 2) throw std::invalid_argument("scheme: beta must exceed 1");
  if (boundary_count < 2 || boundary_count > static_cast<int>(template_vertices.size())) {
    throw std::invalid_argument("scheme: |V0| must be >= 2 and within the template");
  }
  if (static_cast<int>(offsets.size()) != map_count) {
    throw std::invalid_argument("scheme: one offset per map required");
  }
  if (boundary_count > map_count) {
    throw std::invalid_argument("scheme: boundary corners must come from map fixed points");
  }
  // Template vertex j must be the fixed point of map j+1: T_j * (beta-1) == c_j.
  for (int j = 0; j < boundary_count; ++j) {
    for (int d = 0; d < 2; ++d) {
      if (template_vertices[j][d] * (beta - 1) != offsets[j][d]) {
        throw std::invalid_argument("scheme: boundary corner " + std::to_string(j) +
                                    " is not the fixed point of map " + std::to_string(j + 1));
      }
    }
  }
  for (const auto& [a, b] : template_edges) {
    int m = static_cast<int>(template_vertices.size());
    if (a < 0 || b < 0 || a >= m || b >= m || a == b) {
      throw std::invalid_argument("scheme: bad template edge");
    }
  }
  for (size_t i = 0; i < template_vertices.size(); ++i) {
    for (size_t j = i + 1; j < template_vertices.size(); ++j) {
      if (template_vertices[i] == template_vertices[j]) {
        throw std::invalid_argument("scheme: duplicate template vertex");
      }
    }
  }
}

FractalScheme gasket_scheme() {
  FractalScheme s;
  s.name = "gasket";
  s.map_count = 3;
  s.beta = 2;
  s.template_scale = 1;
  s.basis = {{{1.0, 0.5}, {0.0, 0.8660254037844386467637}}};  // lattice -> plane
  s.offsets = {{{0, 0}}, {{1, 0}}, {{0, 1}}};
  s.template_vertices = {{{0, 0}}, {{1, 0}}, {{0, 1}}};
  s.boundary_count = 3;
  s.template_edges = {{0, 1}, {1, 2}, {0, 2}};
  s.finitely_ramified = true;
  s.resistance_scale = 3.0 / 5.0;
  s.mass_scale = 1.0 / 3.0;
  return s;
}

FractalScheme vicsek_scheme() {
  FractalScheme s;
  s.name = "vicsek";
  s.map_count = 5;
  s.beta = 3;
  s.template_scale = 2;  // the cell centre sits at half-integer coordinates
  s.offsets = {{{0, 0}}, {{4, 0}}, {{4, 4}}, {{0, 4}}, {{2, 2}}};
  s.template_vertices = {{{0, 0}}, {{2, 0}}, {{2, 2}}, {{0, 2}}, {{1, 1}}};
  s.boundary_count = 4;
  // Cross template: centre joined to the four corners; the level-n graphs are
  // trees.
  s.template_edges = {{4, 0}, {4, 1}, {4, 2}, {4, 3}};
  s.finitely_ramified = true;
  s.resistance_scale = 1.0 / 3.0;
  s.mass_scale = 1.0 / 5.0;
  return s;
}

FractalScheme carpet_scheme() {
  FractalScheme s;
  s.name = "carpet";
  s.map_count = 8;
  s.beta = 3;
  s.template_scale = 1;
  // Corner maps first (their fixed points are V0), then the side maps.
  s.offsets = {{{0, 0}}, {{2, 0}}, {{2, 2}}, {{0, 2}},
               {{1, 0}}, {{2, 1}}, {{1, 2}}, {{0, 1}}};
  s.template_vertices = {{{0, 0}}, {{1, 0}}, {{1, 1}}, {{0, 1}}};
  s.boundary_count = 4;
  s.template_edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  // Adjacent sub-squares share whole sides, not just corners. Shipped for
  // simulation only; no exact resistance scaling constant is claimed.
  s.finitely_ramified = false;
  s.resistance_scale = 0.0;
  s.mass_scale = 1.0 / 8.0;
  return s;
}

FractalScheme scheme_by_name(const std::string& name) {
  if (name == "gasket") return gasket_scheme();
  if (name == "vicsek") return vicsek_scheme();
  if (name == "carpet") return carpet_scheme();
  throw std::invalid_argument("unknown scheme: " + name);
}

namespace {

std::uint64_t pack_key(std::int64_t x, std::int64_t y) {
  // Keys are nonnegative and bounded by template_scale * beta^level, far
  // below 2^31 at desk depths.
  return (static_cast<std::uint64_t>(x) << 32) | static_cast<std::uint64_t>(y);
}

// Integer position of template vertex t inside cell `word`, at the lattice
// scale template_scale * beta^n: T_t + sum_k beta^(n-k) * c_{i_k}.
std::array<std::int64_t, 2> vertex_key(const FractalScheme& s,
                                       const std::vector<std::uint8_t>& word,
                                       int template_vertex) {
  std::array<std::int64_t, 2> key = s.template_vertices[template_vertex];
  std::int64_t scale = 1;
  for (int k = static_cast<int>(word.size()) - 1; k >= 0; --k) {
    const auto& c = s.offsets[word[k] - 1];
    key[0] += scale * c[0];
    key[1] += scale * c[1];
    scale *= s.beta;
  }
  return key;
}

bool next_word(std::vector<std::uint8_t>& word, int n_maps) {
  for (int i = static_cast<int>(word.size()) - 1; i >= 0; --i) {
    if (word[i] < n_maps) {
      ++word[i];
      std::fill(word.begin() + i + 1, word.end(), 1);
      return true;
    }
  }
  return false;
}

}  // namespace

FractalGraph build_fractal_graph(const FractalScheme& scheme, int level) {
  scheme.validate();
  if (level < 0) throw std::invalid_argument("build_fractal_graph: level must be >= 0");

  const int tverts = static_cast<int>(scheme.template_vertices.size());
  std::unordered_map<std::uint64_t, int> ids;
  std::vector<char> is_boundary_image;  // per id: image of a V0 corner?
  std::vector<std::array<std::int64_t, 2>> keys;
  std::vector<FractalCell> cells;
  std::vector<int> raw_edge_cell;  // provenance: creating cell per raw edge
  std::vector<std::array<int, 2>> raw_edge_ends;

  std::vector<std::uint8_t> word(level, 1);
  bool more = true;
  while (more) {
    FractalCell cell;
    cell.address.word = word;
    std::vector<int> local(tverts);
    for (int t = 0; t < tverts; ++t) {
      auto key = vertex_key(scheme, word, t);
      std::uint64_t packed = pack_key(key[0], key[1]);
      auto [it, inserted] = ids.try_emplace(packed, static_cast<int>(keys.size()));
      if (inserted) {
        keys.push_back(key);
        is_boundary_image.push_back(t < scheme.boundary_count);
      } else if (!is_boundary_image[it->second] || t >= scheme.boundary_count) {
        // Only essential-fixed-point images may be identified across cells;
        // anything else means the gluing rule conflicts with itself.
        throw std::invalid_argument("build_fractal_graph: inconsistent gluing at cell " +
                                    cell.address.to_string());
      }
      local[t] = it->second;
      if (t < scheme.boundary_count) cell.boundary.push_back(it->second);
    }
    for (const auto& [a, b] : scheme.template_edges) {
      if (local[a] == local[b]) {
        throw std::invalid_argument("build_fractal_graph: template edge collapsed at cell " +
                                    cell.address.to_string());
      }
      raw_edge_cell.push_back(static_cast<int>(cells.size()));
      raw_edge_ends.push_back({local[a], local[b]});
    }
    cells.push_back(std::move(cell));
    more = level > 0 && next_word(word, scheme.map_count);
    if (level == 0) more = false;
  }

  const int n = static_cast<int>(keys.size());
  std::int64_t key_scale = scheme.template_scale;
  for (int k = 0; k < level; ++k) key_scale *= scheme.beta;

  std::vector<std::array<double, 2>> coords(n);
  for (int v = 0; v < n; ++v) {
    double lx = static_cast<double>(keys[v][0]) / static_cast<double>(key_scale);
    double ly = static_cast<double>(keys[v][1]) / static_cast<double>(key_scale);
    coords[v] = {scheme.basis[0][0] * lx + scheme.basis[0][1] * ly,
                 scheme.basis[1][0] * lx + scheme.basis[1][1] * ly};
  }

  std::vector<Edge> edges;
  edges.reserve(raw_edge_ends.size());
  for (const auto& ends : raw_edge_ends) {
    edges.push_back({ends[0], ends[1], 1.0});
  }
  ResistanceNetwork net(n, std::move(edges), std::vector<double>(n, 1.0), 0,
                        std::move(coords));

  // Map each raw edge back to its merged id in the network's sorted edge list.
  std::vector<std::pair<std::pair<int, int>, int>> sorted;
  sorted.reserve(net.edges().size());
  for (int i = 0; i < static_cast<int>(net.edges().size()); ++i) {
    sorted.push_back({{net.edges()[i].u, net.edges()[i].v}, i});
  }
  std::sort(sorted.begin(), sorted.end());
  auto edge_id = [&](int u, int v) {
    if (u > v) std::swap(u, v);
    auto it = std::lower_bound(sorted.begin(), sorted.end(),
                               std::make_pair(std::make_pair(u, v), -1));
    return it->second;
  };
  for (size_t i = 0; i < raw_edge_ends.size(); ++i) {
    cells[raw_edge_cell[i]].edge_ids.push_back(
        edge_id(raw_edge_ends[i][0], raw_edge_ends[i][1]));
  }

  FractalGraph g{scheme, level, std::move(net), std::move(cells), std::move(ids), key_scale};
  return g;
}

std::vector<FractalCell> FractalGraph::cells_at(int depth) const {
  if (depth < 0 || depth > level) {
    throw std::invalid_argument("cells_at: depth exceeds built level");
  }
  if (depth == level) return cells;

  std::int64_t up = 1;  // beta^(level - depth)
  for (int k = depth; k < level; ++k) up *= scheme.beta;

  std::vector<FractalCell> out;
  std::vector<std::uint8_t> word(depth, 1);
  bool more = true;
  while (more) {
    FractalCell cell;
    cell.address.word = word;
    for (int j = 0; j < scheme.boundary_count; ++j) {
      auto key = vertex_key(scheme, word, j);
      auto it = key_to_id.find(pack_key(key[0] * up, key[1] * up));
      if (it == key_to_id.end()) {
        throw std::logic_error("cells_at: missing boundary image");
      }
      cell.boundary.push_back(it->second);
    }
    out.push_back(std::move(cell));
    more = depth > 0 && next_word(word, scheme.map_count);
    if (depth == 0) more = false;
  }
  // Depth-m cell edge sets are the level-n provenance grouped by address
  // prefix.
  if (!out.empty()) {
    std::int64_t block = 1;
    for (int k = depth; k < level; ++k) block *= scheme.map_count;
    for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
      auto& target = out[i / block];
      target.edge_ids.insert(target.edge_ids.end(), cells[i].edge_ids.begin(),
                             cells[i].edge_ids.end());
    }
  }
  return out;
}

int cell_chain_distance(const FractalGraph& graph, int depth, int x, int y) {
  auto cs = graph.cells_at(depth);
  std::vector<std::vector<int>> incident(graph.network.vertex_count());
  for (int c = 0; c < static_cast<int>(cs.size()); ++c) {
    for (int v : cs[c].boundary) incident[v].push_back(c);
  }
  if (incident[x].empty() || incident[y].empty()) {
    throw std::invalid_argument("cell_chain_distance: endpoint not in V_n");
  }

  std::vector<int> dist(cs.size(), -1);
  std::deque<int> queue;
  for (int c : incident[x]) {
    dist[c] = 1;
    queue.push_back(c);
  }
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    for (int v : cs[c].boundary) {
      if (v == y) return dist[c];
    }
    for (int v : cs[c].boundary) {
      for (int c2 : incident[v]) {
        if (dist[c2] < 0) {
          dist[c2] = dist[c] + 1;
          queue.push_back(c2);
        }
      }
    }
  }
  throw std::logic_error("cell_chain_distance: no chain found");
}

}  // namespace resform
