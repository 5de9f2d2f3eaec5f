#include "resform/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "resform/environments.hpp"
#include "resform/fractal.hpp"
#include "resform/homogenize.hpp"
#include "resform/metrics.hpp"
#include "resform/resistance.hpp"
#include "resform/simulate.hpp"
#include "resform/threading.hpp"

namespace resform {

void ExperimentConfig::validate() const {
  static const std::vector<std::string> kinds = {"btm",        "lbm",        "rcm_tree",
                                                 "rcm_fractal", "homogenize", "diagnostics"};
  if (std::find(kinds.begin(), kinds.end(), experiment) == kinds.end()) {
    throw ConfigError("unknown experiment tag: " + experiment);
  }
  if (levels.empty() || !std::is_sorted(levels.begin(), levels.end()) ||
      std::adjacent_find(levels.begin(), levels.end()) != levels.end()) {
    throw ConfigError("levels must be a strictly ascending nonempty list");
  }
  if (levels.front() < 0) throw ConfigError("levels must be nonnegative");
  if (replicas < 1) throw ConfigError("replicas must be >= 1");
  if (samples < 1) throw ConfigError("samples must be >= 1");
  bool needs_alpha = experiment == "btm" || experiment == "rcm_tree" ||
                     experiment == "rcm_fractal" ||
                     (experiment == "homogenize" && law == "pareto");
  if (needs_alpha && !(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0,1) for this experiment");
  }
  if (kappa < 0.0) throw ConfigError("kappa must be >= 0");
  if (time_grid.empty() || !std::is_sorted(time_grid.begin(), time_grid.end()) ||
      time_grid.front() <= 0.0) {
    throw ConfigError("time_grid must be ascending positive times");
  }
  if (law != "pareto" && law != "constant" && law != "lognormal") {
    throw ConfigError("law must be pareto | constant | lognormal");
  }
  if (walks != "both" && walks != "vsrw" && walks != "csrw") {
    throw ConfigError("walks must be both | vsrw | csrw");
  }
  try {
    scheme_by_name(scheme);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["scheme"] = scheme;
  j["levels"] = levels;
  j["alpha"] = alpha;
  j["kappa"] = kappa;
  j["time_grid"] = time_grid;
  j["replicas"] = replicas;
  j["samples"] = samples;
  j["seed"] = seed;
  j["law"] = law;
  j["law_value"] = law_value;
  j["walks"] = walks;
  j["max_events"] = max_events;
  j["output_dir"] = output_dir;
  return j.dump();
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  ExperimentConfig c;
  try {
    j.at("experiment").get_to(c.experiment);
    if (j.contains("scheme")) j["scheme"].get_to(c.scheme);
    if (j.contains("levels")) j["levels"].get_to(c.levels);
    if (j.contains("alpha")) j["alpha"].get_to(c.alpha);
    if (j.contains("kappa")) j["kappa"].get_to(c.kappa);
    if (j.contains("time_grid")) j["time_grid"].get_to(c.time_grid);
    if (j.contains("replicas")) j["replicas"].get_to(c.replicas);
    if (j.contains("samples")) j["samples"].get_to(c.samples);
    if (j.contains("seed")) j["seed"].get_to(c.seed);
    if (j.contains("law")) j["law"].get_to(c.law);
    if (j.contains("law_value")) j["law_value"].get_to(c.law_value);
    if (j.contains("walks")) j["walks"].get_to(c.walks);
    if (j.contains("max_events")) j["max_events"].get_to(c.max_events);
    if (j.contains("output_dir")) j["output_dir"].get_to(c.output_dir);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

double ScalingRule::vsrw_time(int level, double t) const {
  return walk_prefactor * t / (std::pow(a1, level) * std::pow(b1, level));
}

double ScalingRule::csrw_time(int level, double t) const {
  return clock_prefactor * t /
         (std::pow(a1, level) * std::pow(b1, static_cast<double>(level) / alpha));
}

double ScalingRule::trap_clock_time(int level, double t) const {
  return t / (std::pow(a1, level) * std::pow(b1, static_cast<double>(level) / alpha));
}

namespace {

ConductanceLaw law_from_config(const ExperimentConfig& c) {
  if (c.law == "pareto") return ConductanceLaw::pareto(c.alpha);
  if (c.law == "constant") return ConductanceLaw::constant(c.law_value);
  return ConductanceLaw::lognormal(0.0, c.law_value);
}

// Per-level precomputation shared by the marginal experiments.
struct LevelContext {
  FractalGraph graph;
  std::vector<double> radial;  // a_n * R_n(root, x), unweighted metric
  double a_n = 1.0;
  double b_n = 1.0;
};

LevelContext make_level(const FractalScheme& scheme, int level) {
  LevelContext ctx{build_fractal_graph(scheme, level), {}, 1.0, 1.0};
  double a1 = scheme.resistance_scale > 0.0 ? scheme.resistance_scale : 1.0;
  ctx.a_n = std::pow(a1, level);
  ctx.b_n = std::pow(scheme.mass_scale, level);
  Eigen::MatrixXd g = green_killed(ctx.graph.network, ctx.graph.network.root());
  ctx.radial.resize(ctx.graph.network.vertex_count());
  for (int v = 0; v < ctx.graph.network.vertex_count(); ++v) {
    ctx.radial[v] = ctx.a_n * g(v, v);
  }
  return ctx;
}

// Marginal coordinates recorded per (replica, grid time): planar x, y and the
// rescaled resistance-to-root radial coordinate.
struct MarginalSamples {
  // [time][coordinate][replica]
  std::vector<std::array<std::vector<double>, 3>> values;
  std::int64_t truncated = 0;

  explicit MarginalSamples(size_t times, size_t replicas) : values(times) {
    for (auto& coords : values) {
      for (auto& v : coords) v.assign(replicas, 0.0);
    }
  }
};

void record_positions(MarginalSamples& ms, const LevelContext& ctx,
                      const PositionSample& ps, int replica) {
  const auto& coords = ctx.graph.network.coords();
  for (size_t ti = 0; ti < ps.positions.size(); ++ti) {
    int v = ps.positions[ti];
    ms.values[ti][0][replica] = coords[v][0];
    ms.values[ti][1][replica] = coords[v][1];
    ms.values[ti][2][replica] = ctx.radial[v];
  }
  if (ps.truncated) ++ms.truncated;
}

const char* kCoordNames[3] = {"x", "y", "radial"};

// Cross-level KS table: one row per (grid time, level pair, coordinate),
// plus the per-time max over coordinates used for the monotonicity check.
void append_ks_tables(Report& report, const std::string& walk_name,
                      const std::vector<int>& levels,
                      const std::vector<double>& time_grid,
                      const std::vector<MarginalSamples>& per_level, int replicas) {
  Table ks{walk_name + "_ks",
           {"time", "pair", "coordinate", "ks", "critical_5pct"},
           {}};
  Table summary{walk_name + "_ks_max", {"time", "pair", "ks_max"}, {}};
  bool monotone = true;
  for (size_t ti = 0; ti < time_grid.size(); ++ti) {
    double prev = -1.0;
    for (size_t li = 0; li + 1 < per_level.size(); ++li) {
      std::string pair = std::to_string(levels[li]) + "->" + std::to_string(levels[li + 1]);
      double worst = 0.0;
      for (int c = 0; c < 3; ++c) {
        double d = ks_distance(per_level[li].values[ti][c],
                               per_level[li + 1].values[ti][c]);
        worst = std::max(worst, d);
        ks.rows.push_back({format_number(time_grid[ti]), pair, kCoordNames[c],
                           format_number(d),
                           format_number(ks_critical_value_5pct(replicas, replicas))});
      }
      summary.rows.push_back({format_number(time_grid[ti]), pair, format_number(worst)});
      if (prev >= 0.0 && worst >= prev) monotone = false;
      prev = worst;
    }
  }
  report.tables.push_back(std::move(ks));
  report.tables.push_back(std::move(summary));
  report.summary[walk_name + "_ks_decreasing"] = monotone ? "true" : "false";
  std::int64_t truncated = 0;
  for (const auto& ms : per_level) truncated += ms.truncated;
  report.summary[walk_name + "_truncated_replicas"] = std::to_string(truncated);
}

std::uint64_t level_stream_base(size_t level_index) {
  return (level_index + 1) * 100'000'000ull;
}

}  // namespace

Report run_btm(const ExperimentConfig& config) {
  config.validate();
  FractalScheme scheme = scheme_by_name(config.scheme);
  if (!(scheme.resistance_scale > 0.0)) {
    throw ConfigError("btm: scheme has no published resistance scaling");
  }
  ScalingRule rule{scheme.resistance_scale, scheme.mass_scale, config.alpha, 1.0, 1.0};

  Report report;
  report.tag = "btm";
  report.config_json = config.to_json();

  std::vector<MarginalSamples> per_level;
  for (size_t li = 0; li < config.levels.size(); ++li) {
    int level = config.levels[li];
    LevelContext ctx = make_level(scheme, level);
    const ResistanceNetwork& net = ctx.graph.network;
    std::vector<double> clock_times(config.time_grid.size());
    for (size_t ti = 0; ti < clock_times.size(); ++ti) {
      clock_times[ti] = rule.trap_clock_time(level, config.time_grid[ti]);
    }
    MarginalSamples ms(config.time_grid.size(), config.replicas);
    std::vector<PositionSample> slots(config.replicas);
    PositionSampleOptions opts;
    opts.max_events = config.max_events;
    parallel_for(config.replicas, [&](int r) {
      // Annealed: the trap landscape is resampled from the replica stream.
      CounterRng rng(config.seed, level_stream_base(li) + r);
      VertexMeasure xi = trap_landscape(net, config.alpha, rng);
      slots[r] = sample_time_changed_positions(net, xi, net.root(), clock_times, rng, opts);
    });
    for (int r = 0; r < config.replicas; ++r) record_positions(ms, ctx, slots[r], r);
    per_level.push_back(std::move(ms));
  }
  append_ks_tables(report, "btm", config.levels, config.time_grid, per_level,
                   config.replicas);
  return report;
}

Report run_lbm(const ExperimentConfig& config) {
  config.validate();
  FractalScheme scheme = scheme_by_name(config.scheme);
  if (!(scheme.resistance_scale > 0.0)) {
    throw ConfigError("lbm: scheme has no published resistance scaling");
  }

  Report report;
  report.tag = "lbm";
  report.config_json = config.to_json();

  std::vector<MarginalSamples> per_level;
  Table sup_table{"supgff", {"level", "mean", "q95"}, {}};
  std::vector<std::vector<double>> sup_samples_all;
  for (size_t li = 0; li < config.levels.size(); ++li) {
    int level = config.levels[li];
    LevelContext ctx = make_level(scheme, level);
    const ResistanceNetwork& net = ctx.graph.network;
    GFFSampler gff(net);
    double sqrt_an = std::sqrt(ctx.a_n);

    MarginalSamples ms(config.time_grid.size(), config.replicas);
    std::vector<PositionSample> slots(config.replicas);
    std::vector<double> sup_gff(config.replicas);
    PositionSampleOptions opts;
    opts.max_events = config.max_events;
    parallel_for(config.replicas, [&](int r) {
      CounterRng rng(config.seed, level_stream_base(li) + r);
      GFFSample sample = gff.sample(rng);
      // Liouville weights of the rescaled space: field sqrt(a_n) gamma with
      // variance a_n g(x,x); the mass prefactor b_n cancels from the clock.
      VertexMeasure w(net.vertex_count(), 0.0);
      for (int v = 0; v < net.vertex_count(); ++v) {
        w.weights[v] = std::exp(config.kappa * sqrt_an * sample.gamma[v] -
                                0.5 * config.kappa * config.kappa * ctx.a_n *
                                    sample.green_diag[v]);
      }
      double m = 0.0;
      for (double g : sample.gamma) m = std::max(m, g);
      sup_gff[r] = sqrt_an * m;
      slots[r] = sample_time_changed_positions(net, w, net.root(), config.time_grid,
                                               rng, opts);
    });
    for (int r = 0; r < config.replicas; ++r) record_positions(ms, ctx, slots[r], r);
    per_level.push_back(std::move(ms));

    std::vector<double> sorted = sup_gff;
    std::sort(sorted.begin(), sorted.end());
    double mean = 0.0;
    for (double v : sorted) mean += v;
    mean /= sorted.size();
    sup_table.rows.push_back(
        {std::to_string(level), format_number(mean),
         format_number(sorted[static_cast<size_t>(0.95 * (sorted.size() - 1))])});
    sup_samples_all.push_back(std::move(sorted));
  }
  append_ks_tables(report, "lbm", config.levels, config.time_grid, per_level,
                   config.replicas);

  Table sup_ks{"supgff_ks", {"pair", "ks", "critical_5pct"}, {}};
  for (size_t li = 0; li + 1 < sup_samples_all.size(); ++li) {
    sup_ks.rows.push_back(
        {std::to_string(config.levels[li]) + "->" + std::to_string(config.levels[li + 1]),
         format_number(ks_distance(sup_samples_all[li], sup_samples_all[li + 1])),
         format_number(ks_critical_value_5pct(config.replicas, config.replicas))});
  }
  report.tables.push_back(std::move(sup_table));
  report.tables.push_back(std::move(sup_ks));
  return report;
}

Report run_rcm(const ExperimentConfig& config) {
  config.validate();
  const bool tree = config.experiment == "rcm_tree";
  FractalScheme scheme = scheme_by_name(config.scheme);
  if (!(scheme.resistance_scale > 0.0)) {
    throw ConfigError("rcm: scheme has no published resistance scaling");
  }
  ConductanceLaw law = law_from_config(config);

  Report report;
  report.tag = config.experiment;
  report.config_json = config.to_json();

  // Tree walk prefactors use rho = E[w^{-1}], estimated from the law.
  CounterRng rho_rng(config.seed, 7);
  auto [rho_hat, rho_se] = law.estimate_mean_inverse(1'000'000, rho_rng);
  report.summary["mean_inverse_conductance"] = format_number(rho_hat);
  report.summary["mean_inverse_conductance_se"] = format_number(rho_se);

  ScalingRule rule{scheme.resistance_scale, scheme.mass_scale, config.alpha,
                   tree ? rho_hat : 1.0, tree ? 2.0 * rho_hat : 1.0};

  // Homogenized reference cells for the fractal resistance comparison.
  std::optional<QMatrix> q_hat;
  double rho_fp = 0.0;
  if (!tree) {
    rho_fp = fixed_point(scheme, QMatrix::uniform(scheme.boundary_count, 1.0)).rho;
    RandomIterateStats stats = random_iterate(scheme, std::min(3, config.levels.back()),
                                              law, std::min(config.samples, 200),
                                              config.seed + 17, false, rho_fp);
    q_hat = stats.mean;
    report.summary["qp_estimate_trace_norm"] = format_number(stats.mean.trace_norm());
    report.summary["fixed_point_rho"] = format_number(rho_fp);
  }

  Table res_table{"resistance_homogenization", {"level", "sup_error"}, {}};
  Table c0_table{"degree_measure_c0", {"level", "c0_estimate"}, {}};
  std::vector<double> res_errors;
  std::vector<MarginalSamples> vsrw_levels, csrw_levels;

  for (size_t li = 0; li < config.levels.size(); ++li) {
    int level = config.levels[li];
    LevelContext ctx = make_level(scheme, level);
    const ResistanceNetwork& net = ctx.graph.network;
    std::uint64_t base = level_stream_base(li);

    // Quenched environment for the tree VSRW; annealed walks resample inside
    // the replica loop.
    ResistanceNetwork quenched_net = net;
    {
      CounterRng env_rng(config.seed, base + 99'999'999ull);
      quenched_net = tree ? sample_conductances(net, law, env_rng)
                          : sample_conductances_per_cell(ctx.graph, law, env_rng);
    }

    // (i) resistance homogenization error against the homogenized reference,
    // root-to-all pairs.
    {
      Eigen::MatrixXd g_omega = green_killed(quenched_net, net.root());
      double sup_err = 0.0;
      if (tree) {
        for (int v = 0; v < net.vertex_count(); ++v) {
          double lhs = ctx.a_n * g_omega(v, v);
          double rhs = rho_hat * ctx.radial[v];  // radial already carries a_n
          sup_err = std::max(sup_err, std::abs(lhs - rhs));
        }
      } else {
        std::int64_t cell_count = 1;
        for (int i = 0; i < level; ++i) cell_count *= scheme.map_count;
        std::vector<QMatrix> cells(cell_count, *q_hat);
        // Homogenized network at this level: constant Q_P-estimate cells.
        std::vector<Edge> edges;
        auto cells_list = ctx.graph.cells;
        for (std::int64_t c = 0; c < cell_count; ++c) {
          const auto& corners = cells_list[c].boundary;
          for (int i = 0; i < scheme.boundary_count; ++i) {
            for (int j = i + 1; j < scheme.boundary_count; ++j) {
              double cond = (*q_hat)(i, j);
              if (cond > 0.0) edges.push_back({corners[i], corners[j], cond});
            }
          }
        }
        ResistanceNetwork hom_net(net.vertex_count(), std::move(edges),
                                  net.measure(), net.root(), net.coords());
        Eigen::MatrixXd g_hom = green_killed(hom_net, net.root());
        for (int v = 0; v < net.vertex_count(); ++v) {
          sup_err = std::max(sup_err,
                             ctx.a_n * std::abs(g_omega(v, v) - g_hom(v, v)));
        }
      }
      res_table.rows.push_back({std::to_string(level), format_number(sup_err)});
      res_errors.push_back(sup_err);
    }

    // (iii) degree-measure constant estimate from the Laplace transform of
    // b_n^{1/alpha} nu_n(F) over environment draws.
    {
      const int env_draws = 2000;
      double b_scale = std::pow(ctx.b_n, 1.0 / config.alpha);
      double acc = 0.0;
      CounterRng env_rng(config.seed, base + 99'999'998ull);
      for (int d = 0; d < env_draws; ++d) {
        double total = 0.0;
        for (size_t e = 0; e < net.edges().size(); ++e) total += law.sample(env_rng);
        acc += std::exp(-b_scale * 2.0 * total);
      }
      double laplace = acc / env_draws;
      double mu_mass = ctx.b_n * net.measure_total();
      double c0 = std::pow(-std::log(laplace) /
                               (std::tgamma(1.0 - config.alpha) * mu_mass),
                           1.0 / config.alpha);
      c0_table.rows.push_back({std::to_string(level), format_number(c0)});
    }

    // (ii) marginals for both walks at their scalings.
    std::vector<double> vsrw_times(config.time_grid.size());
    std::vector<double> csrw_times(config.time_grid.size());
    for (size_t ti = 0; ti < config.time_grid.size(); ++ti) {
      vsrw_times[ti] = rule.vsrw_time(level, config.time_grid[ti]);
      csrw_times[ti] = rule.csrw_time(level, config.time_grid[ti]);
    }

    const bool do_vsrw = config.walks != "csrw";
    const bool do_csrw = config.walks != "vsrw";
    MarginalSamples vs(config.time_grid.size(), config.replicas);
    MarginalSamples cs(config.time_grid.size(), config.replicas);
    std::vector<PositionSample> vs_slots(config.replicas), cs_slots(config.replicas);
    PositionSampleOptions vs_opts;
    vs_opts.max_events = config.max_events;
    vs_opts.collapse_pairs = true;  // heavy-tailed VSRW bounces are compressed
    PositionSampleOptions cs_opts;
    cs_opts.max_events = config.max_events;

    parallel_for(config.replicas, [&](int r) {
      CounterRng rng(config.seed, base + r);
      if (do_vsrw) {
        const ResistanceNetwork* walk_net = &quenched_net;
        ResistanceNetwork fresh = net;  // reassigned for annealed draws
        if (!tree) {
          fresh = sample_conductances_per_cell(ctx.graph, law, rng);
          walk_net = &fresh;
        }
        vs_slots[r] = sample_positions(*walk_net, walk_net->root(), vsrw_times, rng, vs_opts);
      }
      if (do_csrw) {
        // CSRW: annealed in both classes; fresh environment from the same stream.
        ResistanceNetwork cs_env = tree ? sample_conductances(net, law, rng)
                                        : sample_conductances_per_cell(ctx.graph, law, rng);
        VertexMeasure nu = degree_measure(cs_env);
        cs_slots[r] = sample_positions(cs_env.with_measure(nu.weights), cs_env.root(),
                                       csrw_times, rng, cs_opts);
      }
    });
    for (int r = 0; r < config.replicas; ++r) {
      if (do_vsrw) record_positions(vs, ctx, vs_slots[r], r);
      if (do_csrw) record_positions(cs, ctx, cs_slots[r], r);
    }
    vsrw_levels.push_back(std::move(vs));
    csrw_levels.push_back(std::move(cs));
  }

  report.tables.push_back(std::move(res_table));
  report.tables.push_back(std::move(c0_table));
  if (config.walks != "csrw") {
    append_ks_tables(report, "vsrw", config.levels, config.time_grid, vsrw_levels,
                     config.replicas);
  }
  if (config.walks != "vsrw") {
    append_ks_tables(report, "csrw", config.levels, config.time_grid, csrw_levels,
                     config.replicas);
  }

  // Homogenization-error monotonicity note.
  bool decreasing = true;
  for (size_t i = 0; i + 1 < res_errors.size(); ++i) {
    if (res_errors[i + 1] >= res_errors[i]) decreasing = false;
  }
  report.summary["resistance_error_decreasing"] = decreasing ? "true" : "false";
  return report;
}

Report run_homogenize_experiment(const ExperimentConfig& config) {
  config.validate();
  FractalScheme scheme = scheme_by_name(config.scheme);
  ConductanceLaw law = law_from_config(config);

  Report report;
  report.tag = "homogenize";
  report.config_json = config.to_json();

  FixedPointResult fp = fixed_point(scheme, QMatrix::uniform(scheme.boundary_count, 1.0));
  report.summary["rho"] = format_number(fp.rho);
  report.summary["fixed_point_iterations"] = std::to_string(fp.iterations);
  report.summary["fixed_point_residual"] = format_number(fp.residual);

  Table drift{"mean_drift", {"level", "frobenius_drift"}, {}};
  Table variance{"variance_decay", {"level", "mean_entry_variance", "ratio"}, {}};
  Table rejects{"rejections", {"level", "rejected", "total"}, {}};

  std::optional<QMatrix> prev_mean;
  double prev_var = -1.0;
  bool drift_decreasing = true, variance_decreasing = true;
  double prev_drift = -1.0;
  for (int level : config.levels) {
    RandomIterateStats stats = random_iterate(scheme, level, law, config.samples,
                                              config.seed, false, fp.rho);
    double mean_var = stats.entry_variance.sum() /
                      (stats.entry_variance.rows() * stats.entry_variance.cols());
    if (prev_mean) {
      double d = (stats.mean - *prev_mean).frobenius();
      drift.rows.push_back({std::to_string(level), format_number(d)});
      if (prev_drift >= 0.0 && d >= prev_drift) drift_decreasing = false;
      prev_drift = d;
    }
    double ratio = prev_var > 0.0 ? mean_var / prev_var : 0.0;
    variance.rows.push_back({std::to_string(level), format_number(mean_var),
                             format_number(ratio)});
    if (prev_var > 0.0 && mean_var >= prev_var) variance_decreasing = false;
    prev_var = mean_var;
    rejects.rows.push_back({std::to_string(level), std::to_string(stats.rejected),
                            std::to_string(stats.total)});
    prev_mean = stats.mean;
  }
  report.tables.push_back(std::move(drift));
  report.tables.push_back(std::move(variance));
  report.tables.push_back(std::move(rejects));
  report.summary["mean_drift_decreasing"] = drift_decreasing ? "true" : "false";
  report.summary["variance_decreasing"] = variance_decreasing ? "true" : "false";
  return report;
}

Report run_diagnostics(const ExperimentConfig& config) {
  config.validate();
  FractalScheme scheme = scheme_by_name(config.scheme);

  Report report;
  report.tag = "diagnostics";
  report.config_json = config.to_json();

  Table gaps{"embedding_gaps", {"level", "hausdorff", "prohorov", "gap", "gh_vague"}, {}};
  Table profiles{"volume_profile", {"level", "r0", "r_inf", "doubling", "uvd"}, {}};

  std::vector<EmbeddedSpace> spaces;
  for (int level : config.levels) {
    LevelContext ctx = make_level(scheme, level);
    spaces.push_back(embed_network(ctx.graph.network, ctx.b_n));

    // Volume profile in the rescaled resistance metric (the UVD check),
    // computed directly from the distance matrix on a spread of centers.
    Eigen::MatrixXd r = resistance_matrix(ctx.graph.network) * ctx.a_n;
    int n = ctx.graph.network.vertex_count();
    std::vector<int> centers;
    int want = std::min(6, n);
    for (int c = 0; c < want; ++c) centers.push_back(c * (n - 1) / std::max(1, want - 1));
    double r0 = 1e300, rinf = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        r0 = std::min(r0, r(i, j));
        rinf = std::max(rinf, r(i, j));
      }
    }
    std::vector<double> radii;
    for (int k = 0; k <= 8; ++k) radii.push_back(r0 + (rinf - r0) * k / 8.0);
    // Ball masses in the resistance metric.
    double doubling = 0.0;
    bool uvd = true;
    std::vector<std::vector<double>> table(centers.size());
    for (size_t ci = 0; ci < centers.size(); ++ci) {
      for (double rad : radii) {
        double mass = 0.0;
        for (int v = 0; v < n; ++v) {
          if (r(centers[ci], v) < rad) mass += ctx.b_n;
        }
        table[ci].push_back(mass);
      }
    }
    for (size_t k = 0; k < radii.size(); ++k) {
      double lo = 1e300, hi = 0.0, mean1 = 0.0, mean2 = 0.0;
      for (size_t ci = 0; ci < centers.size(); ++ci) {
        lo = std::min(lo, table[ci][k]);
        hi = std::max(hi, table[ci][k]);
        mean1 += table[ci][k];
        double mass2 = 0.0;
        for (int v = 0; v < n; ++v) {
          if (r(centers[ci], v) < 2.0 * radii[k]) mass2 += ctx.b_n;
        }
        mean2 += mass2;
      }
      if (lo > 0.0) {
        doubling = std::max(doubling, mean2 / mean1);
        if (hi / lo > 16.0) uvd = false;
      }
    }
    profiles.rows.push_back({std::to_string(level), format_number(r0),
                             format_number(rinf), format_number(doubling),
                             uvd ? "true" : "false"});
  }
  for (size_t i = 0; i + 1 < spaces.size(); ++i) {
    double dh = hausdorff_distance(spaces[i], spaces[i + 1]);
    double dp = prohorov_distance(spaces[i], spaces[i + 1]);
    double gap = dh + dp + euclidean(spaces[i].points[spaces[i].root],
                                     spaces[i + 1].points[spaces[i + 1].root]);
    std::vector<double> grid = {0.0, 0.5, 1.0, 1.5, 2.0, 3.0};
    double gauge = gh_vague_gap(spaces[i], spaces[i + 1], grid);
    gaps.rows.push_back({std::to_string(config.levels[i]), format_number(dh),
                         format_number(dp), format_number(gap), format_number(gauge)});
  }
  report.tables.push_back(std::move(gaps));
  report.tables.push_back(std::move(profiles));
  return report;
}

Report run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.experiment == "btm") return run_btm(config);
  if (config.experiment == "lbm") return run_lbm(config);
  if (config.experiment == "rcm_tree" || config.experiment == "rcm_fractal") {
    return run_rcm(config);
  }
  if (config.experiment == "homogenize") return run_homogenize_experiment(config);
  return run_diagnostics(config);
}

}  // namespace resform
