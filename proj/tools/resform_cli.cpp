// resform: build fractal approximation networks, compute exact resistance
// quantities, simulate time-changed walks and run the scaling experiments.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "resform/environments.hpp"
#include "resform/fractal.hpp"
#include "resform/harness.hpp"
#include "resform/homogenize.hpp"
#include "resform/metrics.hpp"
#include "resform/network.hpp"
#include "resform/report.hpp"
#include "resform/resistance.hpp"
#include "resform/simulate.hpp"
#include "resform/threading.hpp"

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

int cmd_build(const std::string& scheme, int level, const std::string& out_path) {
  resform::FractalGraph g = resform::build_fractal_graph(resform::scheme_by_name(scheme), level);
  resform::save_network(g.network, out_path);
  std::cout << "wrote " << out_path << ": " << g.network.vertex_count() << " vertices, "
            << g.network.edges().size() << " edges, " << g.cells.size() << " cells\n";
  return 0;
}

int cmd_resist(const std::string& net_path, const std::string& pairs,
               const std::string& out_path) {
  resform::ResistanceNetwork net = resform::load_network(net_path);
  if (pairs == "all") {
    Eigen::MatrixXd r = resform::resistance_matrix(net);
    write_file(out_path, resform::matrix_to_csv(r));
    std::cout << "wrote " << out_path << " (" << r.rows() << "x" << r.cols() << ")\n";
    return 0;
  }
  // "u:v" single pair
  auto colon = pairs.find(':');
  if (colon == std::string::npos) throw resform::ConfigError("--pairs expects 'all' or 'u:v'");
  int u = std::stoi(pairs.substr(0, colon));
  int v = std::stoi(pairs.substr(colon + 1));
  double r = resform::effective_resistance(net, u, v);
  std::cout << "R(" << u << "," << v << ") = " << resform::format_number(r) << "\n";
  if (!out_path.empty()) {
    write_file(out_path, "u,v,resistance\n" + std::to_string(u) + "," + std::to_string(v) +
                             "," + resform::format_number(r) + "\n");
  }
  return 0;
}

int cmd_simulate(const std::string& net_path, int start, double horizon, int replicas,
                 std::uint64_t seed, const std::string& out_dir) {
  resform::ResistanceNetwork net = resform::load_network(net_path);
  std::filesystem::create_directories(out_dir);

  // Replica 0 trajectory as (time, vertex) CSV.
  resform::CounterRng rng(seed, 0);
  resform::Trajectory traj = resform::simulate_vsrw(net, start, horizon, rng);
  std::string csv = "time,vertex\n";
  for (size_t i = 0; i < traj.states.size(); ++i) {
    csv += resform::format_number(traj.jump_times[i]) + "," +
           std::to_string(traj.states[i]) + "\n";
  }
  write_file(out_dir + "/trajectory.csv", csv);

  // Mean local times over all replicas on a 10-point grid.
  std::vector<double> grid;
  for (int k = 1; k <= 10; ++k) grid.push_back(horizon * k / 10.0);
  std::vector<std::vector<double>> acc(net.vertex_count(),
                                       std::vector<double>(grid.size(), 0.0));
  for (int r = 0; r < replicas; ++r) {
    resform::CounterRng rrng(seed, r);
    resform::Trajectory t = resform::simulate_vsrw(net, start, horizon, rrng);
    resform::LocalTimeField ltf(t, net);
    for (int v = 0; v < net.vertex_count(); ++v) {
      for (size_t k = 0; k < grid.size(); ++k) acc[v][k] += ltf.at(v, grid[k]);
    }
  }
  std::string lt_csv = "vertex";
  for (double t : grid) lt_csv += ",t" + resform::format_number(t);
  lt_csv += "\n";
  for (int v = 0; v < net.vertex_count(); ++v) {
    lt_csv += std::to_string(v);
    for (size_t k = 0; k < grid.size(); ++k) {
      lt_csv += "," + resform::format_number(acc[v][k] / replicas);
    }
    lt_csv += "\n";
  }
  write_file(out_dir + "/localtimes.csv", lt_csv);
  std::cout << "wrote " << out_dir << "/trajectory.csv and localtimes.csv (" << replicas
            << " replicas)\n";
  return 0;
}

int cmd_homogenize(const std::string& scheme, double alpha, const std::string& levels,
                   int samples, std::uint64_t seed, const std::string& out_dir) {
  resform::ExperimentConfig cfg;
  cfg.experiment = "homogenize";
  cfg.scheme = scheme;
  cfg.alpha = alpha;
  cfg.samples = samples;
  cfg.seed = seed;
  cfg.output_dir = out_dir;
  cfg.levels.clear();
  // "1..4" or comma list
  auto dots = levels.find("..");
  if (dots != std::string::npos) {
    int lo = std::stoi(levels.substr(0, dots));
    int hi = std::stoi(levels.substr(dots + 2));
    for (int l = lo; l <= hi; ++l) cfg.levels.push_back(l);
  } else {
    std::stringstream ss(levels);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.levels.push_back(std::stoi(item));
  }
  resform::Report report = resform::run_homogenize_experiment(cfg);
  auto files = resform::emit_report(report, out_dir);
  std::cout << "rho = " << report.summary.at("rho") << "\n";
  for (const auto& f : files) std::cout << "wrote " << f << "\n";
  return 0;
}

int cmd_experiment(const std::string& config_path, std::string out_dir) {
  resform::ExperimentConfig cfg = resform::ExperimentConfig::load(config_path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  resform::Report report = resform::run_experiment(cfg);
  auto files = resform::emit_report(report, cfg.output_dir);
  std::cout << "experiment " << cfg.experiment << " done; content hash "
            << resform::content_hash(report) << "\n";
  for (const auto& [k, v] : report.summary) std::cout << "  " << k << " = " << v << "\n";
  for (const auto& f : files) std::cout << "wrote " << f << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resistance-network laboratory"};
  app.require_subcommand(1);

  auto* build = app.add_subcommand("build", "build a fractal approximation network");
  std::string scheme = "gasket", out_path = "net.json";
  int level = 3;
  build->add_option("--scheme", scheme, "gasket | vicsek | carpet");
  build->add_option("--level", level, "approximation level");
  build->add_option("--out", out_path, "output path (.json or text)");

  auto* resist = app.add_subcommand("resist", "effective resistances of a network");
  std::string net_path, pairs = "all", resist_out = "R.csv";
  resist->add_option("--net", net_path, "network file")->required();
  resist->add_option("--pairs", pairs, "'all' or 'u:v'");
  resist->add_option("--out", resist_out, "output CSV");

  auto* simulate = app.add_subcommand("simulate", "simulate the variable speed walk");
  std::string sim_net, sim_out = "sim_out";
  int start = 0, replicas = 1;
  double horizon = 100.0;
  std::uint64_t seed = 42;
  simulate->add_option("--net", sim_net, "network file")->required();
  simulate->add_option("--start", start, "start vertex");
  simulate->add_option("--T", horizon, "time horizon");
  simulate->add_option("--replicas", replicas, "replica count");
  simulate->add_option("--seed", seed, "rng seed");
  simulate->add_option("--out", sim_out, "output directory");

  auto* homog = app.add_subcommand("homogenize", "renormalization fixed point and Monte Carlo");
  std::string h_scheme = "gasket", h_levels = "1..4", h_out = "homogenize_out";
  double h_alpha = 0.5;
  int h_samples = 200;
  std::uint64_t h_seed = 7;
  homog->add_option("--scheme", h_scheme, "gasket | vicsek");
  homog->add_option("--alpha", h_alpha, "pareto tail index");
  homog->add_option("--levels", h_levels, "e.g. 1..4 or 1,2,3");
  homog->add_option("--samples", h_samples, "Monte Carlo samples per level");
  homog->add_option("--seed", h_seed, "rng seed");
  homog->add_option("--out", h_out, "output directory");

  auto* experiment = app.add_subcommand("experiment", "run a configured experiment");
  std::string config_path, exp_out;
  experiment->add_option("--config", config_path, "JSON config file")->required();
  experiment->add_option("--outdir", exp_out, "override output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) return cmd_build(scheme, level, out_path);
    if (resist->parsed()) return cmd_resist(net_path, pairs, resist_out);
    if (simulate->parsed()) {
      return cmd_simulate(sim_net, start, horizon, replicas, seed, sim_out);
    }
    if (homog->parsed()) {
      return cmd_homogenize(h_scheme, h_alpha, h_levels, h_samples, h_seed, h_out);
    }
    if (experiment->parsed()) return cmd_experiment(config_path, exp_out);
  } catch (const resform::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
