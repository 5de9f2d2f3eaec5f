#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace resform {

struct Edge {
  int u = 0;
  int v = 0;
  double conductance = 0.0;  // 1/ohm
};

// Nonnegative weight per vertex. Serves as speed measure, trap landscape,
// degree measure, Liouville measure or FIN pushforward depending on context.
struct VertexMeasure {
  std::vector<double> weights;

  VertexMeasure() = default;
  explicit VertexMeasure(std::vector<double> w) : weights(std::move(w)) {}
  VertexMeasure(int n, double value) : weights(n, value) {}

  double total() const;
  int support_size() const;
  double operator[](int v) const { return weights[v]; }
  int size() const { return static_cast<int>(weights.size()); }
};

// A finite rooted measured resistance network: connected weighted graph with
// strictly positive conductances, a vertex measure and a marked root.
// Instances are immutable after construction and safe to share across threads.
class ResistanceNetwork {
 public:
  ResistanceNetwork(int vertex_count, std::vector<Edge> edges,
                    std::vector<double> measure, int root,
                    std::vector<std::array<double, 2>> coords = {});

  int vertex_count() const { return vertex_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<double>& measure() const { return measure_; }
  double measure_total() const { return measure_total_; }
  int root() const { return root_; }

  bool has_coords() const { return !coords_.empty(); }
  const std::vector<std::array<double, 2>>& coords() const { return coords_; }

  int degree(int v) const { return adj_offset_[v + 1] - adj_offset_[v]; }
  // Total conductance incident to v; the VSRW jump rate at v is this over mu(v).
  double vertex_conductance(int v) const { return vertex_conductance_[v]; }

  struct NeighborRange {
    const int* ids;
    const double* conductance;
    const double* cumulative;  // running sums, cumulative[n-1] == total
    int n;
  };
  NeighborRange neighbors(int v) const {
    int b = adj_offset_[v];
    return {adj_ids_.data() + b, adj_cond_.data() + b, adj_cum_.data() + b,
            adj_offset_[v + 1] - b};
  }

  // Conductance of edge {u,v}, 0 if absent.
  double conductance_between(int u, int v) const;

  ResistanceNetwork with_measure(std::vector<double> measure) const;
  // Same topology and measure, new per-edge conductances (edge order preserved).
  ResistanceNetwork with_conductances(const std::vector<double>& c) const;

  // Full-support check used by operations that treat the measure as a speed
  // measure; throws std::invalid_argument on a zero weight.
  void require_positive_measure() const;

 private:
  int vertex_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> measure_;
  double measure_total_ = 0.0;
  int root_ = 0;
  std::vector<std::array<double, 2>> coords_;

  std::vector<int> adj_offset_;
  std::vector<int> adj_ids_;
  std::vector<double> adj_cond_;
  std::vector<double> adj_cum_;
  std::vector<double> vertex_conductance_;
};

// Path of n unit-length edges with the given conductance, counting measure,
// root at endpoint 0.
ResistanceNetwork build_path(int n, double conductance);

// Serialization. The JSON form mirrors the text form: a header with
// vertex_count and root, one record per vertex (id, coords, measure) and one
// per edge (u, v, conductance). See README for the text grammar.
std::string network_to_json(const ResistanceNetwork& net);
std::string network_to_text(const ResistanceNetwork& net);
ResistanceNetwork network_from_json(const std::string& json_text);
ResistanceNetwork network_from_text(const std::string& text);

// Dispatches on extension: .json -> JSON, anything else -> text format.
void save_network(const ResistanceNetwork& net, const std::string& path);
ResistanceNetwork load_network(const std::string& path);

}  // namespace resform
