#include "resform/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace resform {

double VertexMeasure::total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

int VertexMeasure::support_size() const {
  int n = 0;
  for (double w : weights) n += (w > 0.0) ? 1 : 0;
  return n;
}

ResistanceNetwork::ResistanceNetwork(int vertex_count, std::vector<Edge> edges,
                                     std::vector<double> measure, int root,
                                     std::vector<std::array<double, 2>> coords)
    : vertex_count_(vertex_count),
      measure_(std::move(measure)),
      root_(root),
      coords_(std::move(coords)) {
  if (vertex_count_ <= 0) {
    throw std::invalid_argument("network: vertex_count must be positive");
  }
  if (static_cast<int>(measure_.size()) != vertex_count_) {
    throw std::invalid_argument("network: measure size mismatch");
  }
  if (!coords_.empty() && static_cast<int>(coords_.size()) != vertex_count_) {
    throw std::invalid_argument("network: coords size mismatch");
  }
  if (root_ < 0 || root_ >= vertex_count_) {
    throw std::invalid_argument("network: root out of range");
  }
  for (double w : measure_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("network: measure weights must be >= 0 and finite");
    }
    measure_total_ += w;
  }

  // Merge parallel edges by summing conductances; the rest of the library
  // assumes simple graphs.
  std::map<std::pair<int, int>, double> merged;
  for (const Edge& e : edges) {
    if (e.u == e.v) throw std::invalid_argument("network: self-loop");
    if (e.u < 0 || e.u >= vertex_count_ || e.v < 0 || e.v >= vertex_count_) {
      throw std::invalid_argument("network: edge endpoint out of range");
    }
    if (!(e.conductance > 0.0) || !std::isfinite(e.conductance)) {
      throw std::invalid_argument("network: conductance must be finite and > 0");
    }
    auto key = std::minmax(e.u, e.v);
    merged[key] += e.conductance;
  }
  edges_.reserve(merged.size());
  for (const auto& [key, c] : merged) edges_.push_back({key.first, key.second, c});

  adj_offset_.assign(vertex_count_ + 1, 0);
  for (const Edge& e : edges_) {
    ++adj_offset_[e.u + 1];
    ++adj_offset_[e.v + 1];
  }
  for (int v = 0; v < vertex_count_; ++v) adj_offset_[v + 1] += adj_offset_[v];
  adj_ids_.resize(2 * edges_.size());
  adj_cond_.resize(2 * edges_.size());
  std::vector<int> fill(adj_offset_.begin(), adj_offset_.end() - 1);
  for (const Edge& e : edges_) {
    adj_ids_[fill[e.u]] = e.v;
    adj_cond_[fill[e.u]++] = e.conductance;
    adj_ids_[fill[e.v]] = e.u;
    adj_cond_[fill[e.v]++] = e.conductance;
  }
  adj_cum_.resize(adj_ids_.size());
  vertex_conductance_.assign(vertex_count_, 0.0);
  for (int v = 0; v < vertex_count_; ++v) {
    double run = 0.0;
    for (int k = adj_offset_[v]; k < adj_offset_[v + 1]; ++k) {
      run += adj_cond_[k];
      adj_cum_[k] = run;
    }
    vertex_conductance_[v] = run;
  }

  // Connectivity.
  std::vector<int> stack{0};
  std::vector<char> seen(vertex_count_, 0);
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int k = adj_offset_[v]; k < adj_offset_[v + 1]; ++k) {
      int w = adj_ids_[k];
      if (!seen[w]) {
        seen[w] = 1;
        ++visited;
        stack.push_back(w);
      }
    }
  }
  if (visited != vertex_count_) {
    throw std::invalid_argument("network: graph is not connected");
  }
}

double ResistanceNetwork::conductance_between(int u, int v) const {
  NeighborRange r = neighbors(u);
  for (int k = 0; k < r.n; ++k) {
    if (r.ids[k] == v) return r.conductance[k];
  }
  return 0.0;
}

ResistanceNetwork ResistanceNetwork::with_measure(std::vector<double> measure) const {
  return ResistanceNetwork(vertex_count_, edges_, std::move(measure), root_, coords_);
}

ResistanceNetwork ResistanceNetwork::with_conductances(const std::vector<double>& c) const {
  if (c.size() != edges_.size()) {
    throw std::invalid_argument("with_conductances: size mismatch");
  }
  std::vector<Edge> e = edges_;
  for (size_t i = 0; i < e.size(); ++i) e[i].conductance = c[i];
  return ResistanceNetwork(vertex_count_, std::move(e), measure_, root_, coords_);
}

void ResistanceNetwork::require_positive_measure() const {
  for (double w : measure_) {
    if (!(w > 0.0)) {
      throw std::invalid_argument("operation requires a strictly positive speed measure");
    }
  }
}

ResistanceNetwork build_path(int n, double conductance) {
  if (n < 1) throw std::invalid_argument("build_path: need n >= 1 edges");
  std::vector<Edge> edges(n);
  std::vector<std::array<double, 2>> coords(n + 1);
  for (int i = 0; i < n; ++i) edges[i] = {i, i + 1, conductance};
  for (int i = 0; i <= n; ++i) coords[i] = {static_cast<double>(i), 0.0};
  return ResistanceNetwork(n + 1, std::move(edges), std::vector<double>(n + 1, 1.0), 0,
                           std::move(coords));
}

namespace {

nlohmann::json network_json(const ResistanceNetwork& net) {
  nlohmann::json j;
  j["vertex_count"] = net.vertex_count();
  j["root"] = net.root();
  nlohmann::json vs = nlohmann::json::array();
  for (int v = 0; v < net.vertex_count(); ++v) {
    nlohmann::json rec;
    rec["id"] = v;
    rec["measure"] = net.measure()[v];
    if (net.has_coords()) rec["coords"] = {net.coords()[v][0], net.coords()[v][1]};
    vs.push_back(rec);
  }
  j["vertices"] = vs;
  nlohmann::json es = nlohmann::json::array();
  for (const Edge& e : net.edges()) es.push_back({e.u, e.v, e.conductance});
  j["edges"] = es;
  return j;
}

}  // namespace

std::string network_to_json(const ResistanceNetwork& net) {
  return network_json(net).dump(2);
}

ResistanceNetwork network_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  int n = j.at("vertex_count").get<int>();
  int root = j.at("root").get<int>();
  std::vector<double> measure(n, 1.0);
  std::vector<std::array<double, 2>> coords;
  for (const auto& rec : j.at("vertices")) {
    int id = rec.at("id").get<int>();
    if (id < 0 || id >= n) throw std::invalid_argument("network json: bad vertex id");
    measure[id] = rec.at("measure").get<double>();
    if (rec.contains("coords")) {
      coords.resize(n, {0.0, 0.0});
      coords[id] = {rec["coords"][0].get<double>(), rec["coords"][1].get<double>()};
    }
  }
  std::vector<Edge> edges;
  for (const auto& rec : j.at("edges")) {
    edges.push_back({rec[0].get<int>(), rec[1].get<int>(), rec[2].get<double>()});
  }
  return ResistanceNetwork(n, std::move(edges), std::move(measure), root, std::move(coords));
}

std::string network_to_text(const ResistanceNetwork& net) {
  std::ostringstream os;
  os.precision(17);
  os << "network " << net.vertex_count() << " " << net.root() << "\n";
  for (int v = 0; v < net.vertex_count(); ++v) {
    os << "v " << v;
    if (net.has_coords()) {
      os << " " << net.coords()[v][0] << " " << net.coords()[v][1];
    } else {
      os << " . .";
    }
    os << " " << net.measure()[v] << "\n";
  }
  for (const Edge& e : net.edges()) {
    os << "e " << e.u << " " << e.v << " " << e.conductance << "\n";
  }
  return os.str();
}

ResistanceNetwork network_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string tag;
  int n = 0, root = 0;
  if (!(is >> tag >> n >> root) || tag != "network") {
    throw std::invalid_argument("network text: bad header");
  }
  std::vector<double> measure(n, 1.0);
  std::vector<std::array<double, 2>> coords;
  bool any_coords = false;
  std::vector<Edge> edges;
  while (is >> tag) {
    if (tag == "v") {
      int id;
      std::string cx, cy;
      double m;
      if (!(is >> id >> cx >> cy >> m)) throw std::invalid_argument("network text: bad vertex line");
      if (id < 0 || id >= n) throw std::invalid_argument("network text: bad vertex id");
      measure[id] = m;
      if (cx != ".") {
        coords.resize(n, {0.0, 0.0});
        coords[id] = {std::stod(cx), std::stod(cy)};
        any_coords = true;
      }
    } else if (tag == "e") {
      Edge e;
      if (!(is >> e.u >> e.v >> e.conductance)) {
        throw std::invalid_argument("network text: bad edge line");
      }
      edges.push_back(e);
    } else {
      throw std::invalid_argument("network text: unknown record '" + tag + "'");
    }
  }
  if (!any_coords) coords.clear();
  return ResistanceNetwork(n, std::move(edges), std::move(measure), root, std::move(coords));
}

void save_network(const ResistanceNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    out << network_to_json(net) << "\n";
  } else {
    out << network_to_text(net);
  }
}

ResistanceNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string content = buf.str();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    return network_from_json(content);
  }
  return network_from_text(content);
}

}  // namespace resform
