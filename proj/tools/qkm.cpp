// qkm: command-line front end for graph generation, consensus runs,
// distributed clustering runs and seed sweeps.
//
// Exit status: 0 when every check passed, 1 when a bound, invariant or
// equivalence check failed, 2 for usage and input errors.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qkm/errors.hpp"
#include "qkm/graph.hpp"
#include "qkm/io.hpp"
#include "qkm/oracle.hpp"
#include "qkm/sim.hpp"

namespace fs = std::filesystem;
using namespace qkm;

namespace {

constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::int64_t> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag + ": expected comma-separated integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError(flag + " must not be empty");
  return out;
}

std::optional<std::size_t> parse_d_bound(const std::string& text) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size() && v > 0) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw UsageError("--d-bound must be 'auto' or a positive integer, got '" + text + "'");
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw UsageError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

const char* yes_no(bool b) { return b ? "true" : "false"; }

// Settings shared by kmeans and sweep.
struct ExperimentFlags {
  std::size_t n = 100;
  std::size_t k = 3;
  std::string ks = "3";
  std::size_t dim = 2;
  std::string box_lo = "0";
  std::string box_hi = "50";
  double p = 0.05;
  std::string d_bound = "auto";
  std::size_t max_rounds = 100;
  std::int64_t scale = 1;

  void add_to(CLI::App* sub, bool k_list) {
    sub->add_option("--n", n, "Number of nodes (> 2)")->capture_default_str();
    if (k_list) {
      sub->add_option("--k", ks, "Cluster count, or a comma-separated list of counts")->capture_default_str();
    } else {
      sub->add_option("--k", k, "Number of clusters (< n)")->capture_default_str();
    }
    sub->add_option("--d", dim, "Observation dimension")->capture_default_str();
    sub->add_option("--box-lo", box_lo, "Lower box corner: one value or one per dimension")->capture_default_str();
    sub->add_option("--box-hi", box_hi, "Upper box corner: one value or one per dimension")->capture_default_str();
    sub->add_option("--p", p, "Extra-edge probability of the random digraph")->capture_default_str();
    sub->add_option("--d-bound", d_bound, "Diameter bound known to all nodes: auto or N")->capture_default_str();
    sub->add_option("--max-rounds", max_rounds, "Cap on centroid calculations")->capture_default_str();
    sub->add_option("--scale", scale, "Quantization scale applied to coordinates")->capture_default_str();
  }

  ExperimentConfig config() const {
    ExperimentConfig c;
    c.n = n;
    c.k = k;
    c.dim = dim;
    c.box_lo = parse_int_list(box_lo, "--box-lo");
    c.box_hi = parse_int_list(box_hi, "--box-hi");
    c.edge_probability = p;
    c.d_bound = parse_d_bound(d_bound);
    c.max_rounds = max_rounds;
    c.scale = scale;
    return c;
  }
};

// Expands "--config FILE" into the equivalent flags, placed right after the
// subcommand name so that flags given on the command line take precedence.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  if (args.empty()) return args;
  const CLI::App* sub = nullptr;
  for (const auto* s : app.get_subcommands({})) {
    if (s->get_name() == args[0]) sub = s;
  }
  if (sub == nullptr) return args;
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(*path);
  } catch (const CLI::Error& e) {
    throw UsageError("cannot read config file " + *path + ": " + e.what());
  }
  std::vector<std::string> injected;
  for (const auto& item : items) {
    const std::string name = item.fullname();
    if (name == "config") continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + name);
    if (opt == nullptr) throw UsageError("config file " + *path + ": unknown key '" + name + "'");
    if (opt->get_expected_min() == 0) {
      const std::string v = item.inputs.empty() ? "true" : item.inputs.front();
      if (v == "true" || v == "1") injected.push_back("--" + name);
      continue;
    }
    std::string joined;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) joined += (i ? "," : "") + item.inputs[i];
    injected.push_back("--" + name);
    injected.push_back(joined);
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

int cmd_gen_graph(std::size_t n, double p, std::uint64_t seed, const std::string& out) {
  if (n <= 2) throw UsageError("--n must be greater than 2 (n > 2 required)");
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("--p must lie in [0, 1]");
  const Digraph g = generate_random_digraph(n, p, seed);
  const std::size_t d = diameter(g);
  Json config{{"command", "gen-graph"}, {"n", n}, {"p", p}, {"seed", seed}};
  const std::string text = "# config: " + config.dump() + "\n" + serialize_edge_list(g);
  const bool to_stdout = out.empty() || out == "-";
  if (to_stdout) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  (to_stdout ? std::cerr : std::cout) << "n=" << n << " m=" << g.edge_count() << " D=" << d << "\n";
  return 0;
}

int cmd_consensus(const std::string& graph_path, const std::string& values_path, std::int64_t scale,
                  const std::string& out_dir, bool record) {
  if (scale <= 0) throw UsageError("--scale must be positive");
  const Digraph g = parse_edge_list(read_file(graph_path));
  const auto initial = parse_observations(read_file(values_path), scale);
  if (initial.size() != g.node_count()) {
    throw UsageError("graph has " + std::to_string(g.node_count()) + " nodes but " + values_path + " has " +
                     std::to_string(initial.size()) + " vectors");
  }
  ConsensusOptions opts;
  opts.record_messages = record;
  const ConsensusTrace trace = run_consensus(g, initial, opts);

  Json config{{"command", "consensus"}, {"graph", graph_path}, {"values", values_path}, {"scale", scale}};
  const fs::path dir = prepare_out_dir(out_dir);
  write_file((dir / "consensus_trace.csv").string(), consensus_trace_csv(trace, config));
  write_file((dir / "consensus_summary.json").string(), dump(consensus_summary(trace, config)));
  if (record) write_file((dir / "messages.csv").string(), messages_csv(trace.log, config));

  const bool uniform = std::all_of(trace.final_estimates.begin(), trace.final_estimates.end(),
                                   [&](const auto& e) { return e && *e == trace.final_estimates.front(); });
  std::cout << "n=" << trace.n << " m=" << trace.m << " average=" << trace.average.str() << "\n";
  if (uniform) {
    std::cout << "estimate at all nodes: " << trace.final_estimates.front()->str() << "\n";
  } else {
    std::cout << "estimates differ across nodes\n";
  }
  std::cout << "S_t=" << trace.convergence_step << " bound=" << trace.bound << " bound_ok=" << yes_no(trace.bound_ok)
            << " conservation_ok=" << yes_no(trace.conservation_ok) << "\n";
  if (!trace.failure.empty()) std::cout << "failure: " << trace.failure << "\n";
  return trace.ok() ? 0 : kCheckFailed;
}

struct KMeansArgs {
  ExperimentFlags flags;
  std::string graph;
  std::string observations;
  std::string centroids;
  std::optional<std::uint64_t> seed;
  std::uint64_t graph_seed = 1;
  std::uint64_t observation_seed = 2;
  std::uint64_t centroid_seed = 3;
  std::string out_dir = "out";
  bool oracle_check = false;
  bool record = false;
};

int cmd_kmeans(const KMeansArgs& a) {
  ExperimentConfig config = a.flags.config();
  config.graph_seed = a.seed ? *a.seed : a.graph_seed;
  config.observation_seed = a.seed ? *a.seed + 1 : a.observation_seed;
  config.centroid_seed = a.seed ? *a.seed + 2 : a.centroid_seed;

  std::optional<Digraph> graph;
  std::optional<std::vector<IntVector>> observations;
  std::optional<CentroidSet> centroids;
  if (!a.graph.empty()) {
    graph = parse_edge_list(read_file(a.graph));
    config.n = graph->node_count();
  }
  if (!a.observations.empty()) {
    observations = parse_observations(read_file(a.observations), config.scale);
    config.dim = observations->front().size();
    if (!graph) config.n = observations->size();
  }
  if (!a.centroids.empty()) {
    centroids = parse_centroids(read_file(a.centroids), config.scale);
    config.k = centroids->k();
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  Instance inst = generate_instance(config);
  if (graph) inst.graph = std::move(*graph);
  if (observations) inst.observations = std::move(*observations);
  if (centroids) inst.initial = std::move(*centroids);
  if (inst.observations.size() != inst.graph.node_count()) {
    throw UsageError("graph has " + std::to_string(inst.graph.node_count()) + " nodes but there are " +
                     std::to_string(inst.observations.size()) + " observations");
  }

  KMeansOptions opts;
  opts.d_bound = config.d_bound;
  opts.max_rounds = config.max_rounds;
  opts.record_messages = a.record;
  const KMeansTrace trace = run_kmeans(inst.graph, inst.observations, inst.initial, opts);

  std::optional<EquivalenceReport> equivalence;
  if (a.oracle_check) {
    equivalence = check_equivalence(trace, lloyd_reference(inst.observations, inst.initial, config.max_rounds));
  }

  Json cfg = config_json(config);
  cfg["command"] = "kmeans";
  cfg["n"] = inst.graph.node_count();
  if (!a.graph.empty()) cfg["graph"] = a.graph;
  if (!a.observations.empty()) cfg["observations"] = a.observations;
  if (!a.centroids.empty()) cfg["centroids"] = a.centroids;
  cfg["oracle_check"] = a.oracle_check;

  const fs::path dir = prepare_out_dir(a.out_dir);
  write_file((dir / "trace.csv").string(), kmeans_trace_csv(trace, cfg));
  write_file((dir / "summary.json").string(), dump(kmeans_summary(trace, cfg, equivalence)));
  write_file((dir / "objective.csv").string(), objective_csv(trace, cfg));
  write_file((dir / "trajectories.csv").string(), trajectories_csv(trace, cfg));
  write_file((dir / "assignments.csv").string(), assignments_csv(trace, cfg));
  if (a.record) write_file((dir / "messages.csv").string(), messages_csv(trace.log, cfg));

  std::cout << "n=" << trace.n << " m=" << trace.m << " D=" << trace.diameter << " D_bound=" << trace.d_bound
            << " k=" << trace.k << "\n";
  std::cout << "T=" << trace.T() << " terminated=" << yes_no(trace.terminated) << " C_t=" << trace.total_steps
            << " bound=" << trace.step_bound << " bound_ok=" << yes_no(trace.bound_ok) << "\n";
  std::cout << "objective_monotone=" << yes_no(trace.objective_monotone)
            << " silence_ok=" << yes_no(trace.silence_ok) << " conservation_ok=" << yes_no(trace.conservation_ok)
            << "\n";
  if (!trace.terminated && trace.failure.empty()) {
    std::cout << "stopped after max_rounds=" << config.max_rounds << " without meeting the stop condition\n";
  }
  if (!trace.failure.empty()) std::cout << "failure: " << trace.failure << "\n";
  if (equivalence) {
    std::cout << "equivalence: " << (equivalence->pass ? "pass" : "fail") << " (" << equivalence->message << ")\n";
  }
  const bool ok = trace.checks_ok() && (!equivalence || equivalence->pass);
  return ok ? 0 : kCheckFailed;
}

struct SweepArgs {
  ExperimentFlags flags;
  std::size_t seeds = 100;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string out_dir = "out";
};

int cmd_sweep(const SweepArgs& a) {
  const auto ks = parse_int_list(a.flags.ks, "--k");
  if (a.seeds == 0) throw UsageError("--seeds must be positive");
  const fs::path dir = prepare_out_dir(a.out_dir);
  for (std::int64_t k : ks) {
    if (k <= 0) throw UsageError("--k values must be positive");
    ExperimentFlags f = a.flags;
    f.k = static_cast<std::size_t>(k);
    ExperimentConfig base = f.config();
    try {
      base.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    Json cfg = config_json(base);
    cfg.erase("graph_seed");
    cfg.erase("observation_seed");
    cfg.erase("centroid_seed");
    cfg["command"] = "sweep";
    cfg["seeds"] = a.seeds;
    cfg["master_seed"] = a.seed;

    const SweepResult result = sweep(base, a.seeds, a.seed, a.threads);
    const std::string suffix = ks.size() > 1 ? "_k" + std::to_string(k) : "";
    write_file((dir / ("runs" + suffix + ".csv")).string(), sweep_runs_csv(result, cfg));
    write_file((dir / ("histogram" + suffix + ".csv")).string(), histogram_csv(result, cfg));
    write_file((dir / ("mean_objective" + suffix + ".csv")).string(), mean_objective_csv(result, cfg));
    const Json summary = sweep_summary(result, cfg);
    write_file((dir / ("summary" + suffix + ".json")).string(), dump(summary));
    std::cout << "k=" << k << " runs=" << result.runs.size() << " mean_T=" << summary["mean_T"].get<std::string>()
              << " (" << result.mean_T << ") min_T=" << result.min_T << " max_T=" << result.max_T << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed exact k-means over directed graphs with quantized communication"};
  app.require_subcommand(1);

  std::size_t gg_n = 100;
  double gg_p = 0.05;
  std::uint64_t gg_seed = 1;
  std::string gg_out;
  std::string unused_config;
  auto* gen = app.add_subcommand("gen-graph", "Generate a strongly connected random digraph");
  gen->add_option("--n", gg_n, "Number of nodes (> 2)")->capture_default_str();
  gen->add_option("--p", gg_p, "Probability of each extra edge")->capture_default_str();
  gen->add_option("--seed", gg_seed, "Random seed")->capture_default_str();
  gen->add_option("-o,--out", gg_out, "Output edge-list file (stdout when omitted)");

  std::string c_graph;
  std::string c_values;
  std::int64_t c_scale = 1;
  std::string c_out = "out";
  bool c_record = false;
  auto* cons = app.add_subcommand("consensus", "Run exact quantized average consensus");
  cons->add_option("--graph", c_graph, "Edge-list file")->required();
  cons->add_option("--values", c_values, "Initial vectors, one line per node")->required();
  cons->add_option("--scale", c_scale, "Quantization scale applied to values")->capture_default_str();
  cons->add_option("--out-dir", c_out, "Output directory")->capture_default_str();
  cons->add_flag("--record-messages", c_record, "Write the per-message log");

  KMeansArgs ka;
  auto* km = app.add_subcommand("kmeans", "Run distributed k-means");
  ka.flags.add_to(km, false);
  km->add_option("--graph", ka.graph, "Edge-list file (generated when omitted)");
  km->add_option("--observations", ka.observations, "Observation file (generated when omitted)");
  km->add_option("--centroids", ka.centroids, "Initial centroid file (generated when omitted)");
  km->add_option("--seed", ka.seed, "Sets graph, observation and centroid seeds to S, S+1, S+2");
  km->add_option("--graph-seed", ka.graph_seed, "Seed of the random digraph")->capture_default_str();
  km->add_option("--observation-seed", ka.observation_seed, "Seed of the observations")->capture_default_str();
  km->add_option("--centroid-seed", ka.centroid_seed, "Seed of the initial centroids")->capture_default_str();
  km->add_option("--out-dir", ka.out_dir, "Output directory")->capture_default_str();
  km->add_flag("--oracle-check", ka.oracle_check, "Compare against the centralized reference");
  km->add_flag("--record-messages", ka.record, "Write the per-message log");

  SweepArgs sa;
  auto* sw = app.add_subcommand("sweep", "Run many seeded experiments and aggregate T");
  sa.flags.add_to(sw, true);
  sw->add_option("--seeds", sa.seeds, "Number of runs")->capture_default_str();
  sw->add_option("--seed", sa.seed, "Master seed")->capture_default_str();
  sw->add_option("--threads", sa.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sw->add_option("--out-dir", sa.out_dir, "Output directory")->capture_default_str();

  for (auto* sub : {gen, cons, km, sw}) {
    sub->add_option("--config", unused_config, "key=value file; command-line flags override it");
    for (auto* opt : sub->get_options()) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*gen) return cmd_gen_graph(gg_n, gg_p, gg_seed, gg_out);
    if (*cons) return cmd_consensus(c_graph, c_values, c_scale, c_out, c_record);
    if (*km) return cmd_kmeans(ka);
    if (*sw) return cmd_sweep(sa);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const GraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ProtocolError& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return kCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
