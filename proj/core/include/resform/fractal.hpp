#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "resform/network.hpp"

namespace resform {

// Word over {1..N}; the empty word denotes the whole space.
struct CellAddress {
  std::vector<std::uint8_t> word;

  int level() const { return static_cast<int>(word.size()); }
  std::string to_string() const;
  bool operator==(const CellAddress&) const = default;
};

// Iterated-function-system description of a uniform finitely ramified fractal
// and its graph approximations. All template geometry lives on an integer
// lattice (scaled by template_scale) so that vertex identifications across
// cells are exact integer comparisons at every level.
//
// Maps are x -> (x + c_i) / beta in lattice coordinates, with c_i =
// offsets[i] / template_scale. The first boundary_count template vertices are
// the essential fixed points V0, ordered so that template vertex j is the
// fixed point of map j+1.
struct FractalScheme {
  std::string name;
  int map_count = 0;        // N
  int beta = 2;             // integer contraction ratio
  int template_scale = 1;   // lattice denominator for template coordinates
  std::array<std::array<double, 2>, 2> basis = {{{1.0, 0.0}, {0.0, 1.0}}};
  std::vector<std::array<std::int64_t, 2>> offsets;            // scaled c_i
  std::vector<std::array<std::int64_t, 2>> template_vertices;  // V0 first
  int boundary_count = 0;  // |V0|
  std::vector<std::pair<int, int>> template_edges;
  bool finitely_ramified = true;
  // Per-level scaling constants, a_n = resistance_scale^n and
  // b_n = mass_scale^n. resistance_scale == 0 means no exact value is claimed
  // (carpet).
  double resistance_scale = 0.0;
  double mass_scale = 0.0;

  void validate() const;  // throws std::invalid_argument
};

FractalScheme gasket_scheme();
FractalScheme vicsek_scheme();
FractalScheme carpet_scheme();
// Lookup by name ("gasket" | "vicsek" | "carpet").
FractalScheme scheme_by_name(const std::string& name);

struct FractalCell {
  CellAddress address;
  std::vector<int> boundary;  // vertex ids of the |V0| corner images
  std::vector<int> edge_ids;  // network edge ids created by this cell
};

// A built level-n approximation graph: unit conductances, counting measure,
// root at the fixed point of map 1. Carries the cell index and the exact
// lattice keys so coarser cells can be recovered.
struct FractalGraph {
  FractalScheme scheme;
  int level = 0;
  ResistanceNetwork network;
  std::vector<FractalCell> cells;  // level-n cells in lexicographic order
  std::unordered_map<std::uint64_t, int> key_to_id;
  std::int64_t key_scale = 1;  // template_scale * beta^level

  // n-cells at any depth m <= level, lexicographic order: N^m cells, each
  // listing the vertex ids of its |V0| boundary corner images.
  std::vector<FractalCell> cells_at(int depth) const;
};

FractalGraph build_fractal_graph(const FractalScheme& scheme, int level);

// Minimum length of a chain of depth-n cells joining x to y (consecutive
// cells intersect; x in the first, y in the last). x and y must lie in V_n,
// i.e. be boundary-corner images.
int cell_chain_distance(const FractalGraph& graph, int depth, int x, int y);

}  // namespace resform
