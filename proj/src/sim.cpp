#include "qkm/sim.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "qkm/errors.hpp"

namespace qkm {

void MessageBus::send(Message msg) {
  if (msg.receiver >= inbox_.size()) throw ProtocolError("message to unknown node");
  inbox_[msg.receiver].push_back(std::move(msg));
  ++in_flight_;
}

std::vector<std::vector<Message>> MessageBus::deliver() {
  std::vector<std::vector<Message>> out(inbox_.size());
  out.swap(inbox_);
  in_flight_ = 0;
  return out;
}

std::size_t MessageBus::clear() {
  std::size_t dropped = in_flight_;
  for (auto& v : inbox_) v.clear();
  in_flight_ = 0;
  return dropped;
}

void PayloadStats::add(const Mass& mass) {
  std::size_t bits = bit_width(mass.z);
  for (const auto& v : mass.y) bits += bit_width(v);
  ++messages;
  this->bits += bits;
  max_bits = std::max(max_bits, bits);
}

namespace {

void check_vectors(const std::vector<IntVector>& vectors, std::size_t n, const char* what) {
  if (vectors.size() != n) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(n) + " vectors, got " +
                                std::to_string(vectors.size()));
  }
  if (n == 0 || vectors.front().empty()) throw std::invalid_argument(std::string(what) + ": empty input");
  for (const auto& v : vectors) {
    if (v.size() != vectors.front().size()) {
      throw std::invalid_argument(std::string(what) + ": inconsistent dimensions");
    }
  }
}

EdgeOrdering resolve_ordering(const Digraph& g, const std::optional<EdgeOrdering>& ordering) {
  if (!ordering) return assign_edge_orders(g);
  if (ordering->node_count() != g.node_count()) {
    throw std::invalid_argument("edge ordering does not match the graph");
  }
  return *ordering;
}

std::vector<NodeId> orders_of(const EdgeOrdering& ordering, NodeId j) {
  auto span = ordering.by_order(j);
  return {span.begin(), span.end()};
}

std::uint64_t consensus_step_bound(const Digraph& g) {
  const std::uint64_t n = g.node_count();
  const std::uint64_t m = g.edge_count();
  return n * m * m;
}

void log_message(std::vector<MessageLogEntry>& log, bool& truncated, std::size_t limit, std::uint64_t step,
                 const Message& msg) {
  if (log.size() >= limit) {
    truncated = true;
    return;
  }
  log.push_back(MessageLogEntry{step, msg.sender, msg.receiver, msg.label, msg.mass});
}

}  // namespace

ConsensusTrace run_consensus(const Digraph& g, const std::vector<IntVector>& initial,
                             const ConsensusOptions& options) {
  const std::size_t n = g.node_count();
  check_vectors(initial, n, "run_consensus");
  if (!is_strongly_connected(g)) throw GraphError("graph not strongly connected");
  const EdgeOrdering ordering = resolve_ordering(g, options.ordering);
  const std::size_t dim = initial.front().size();

  ConsensusTrace trace;
  trace.n = n;
  trace.m = g.edge_count();
  trace.dim = dim;
  trace.bound = consensus_step_bound(g);

  IntVector total_y(dim, BigInt(0));
  for (const auto& v : initial) {
    for (std::size_t i = 0; i < dim; ++i) total_y[i] += v[i];
  }
  const BigInt total_z(n);
  trace.average = FractionVector(total_y, total_z).reduced();

  std::vector<ConsensusState> states;
  states.reserve(n);
  MessageBus bus(n);
  auto send = [&](std::uint64_t step, Message msg) {
    trace.payload.add(msg.mass);
    if (options.record_messages) {
      log_message(trace.log, trace.log_truncated, options.message_log_limit, step, msg);
    }
    bus.send(std::move(msg));
  };
  auto all_at_average = [&] {
    return std::all_of(states.begin(), states.end(),
                       [&](const ConsensusState& s) { return s.estimate() && *s.estimate() == trace.average; });
  };
  auto conserved = [&] {
    IntVector y(dim, BigInt(0));
    BigInt z = 0;
    auto add = [&](const Mass& m) {
      for (std::size_t i = 0; i < dim; ++i) y[i] += m.y[i];
      z += m.z;
    };
    for (const auto& s : states) add(s.held());
    for (const auto& inbox : bus.pending()) {
      for (const auto& msg : inbox) add(msg.mass);
    }
    return y == total_y && z == total_z;
  };

  std::uint64_t sent_this_step = 0;
  for (NodeId j = 0; j < n; ++j) {
    auto started = ConsensusState::init(initial[j], BigInt(1), orders_of(ordering, j));
    states.push_back(std::move(started.state));
    if (started.message) {
      send(0, Message{0, j, started.message->to, std::move(started.message->mass)});
      ++sent_this_step;
    }
  }
  trace.messages_per_step.push_back(sent_this_step);
  trace.at_average.push_back(all_at_average());
  if (options.verify_conservation && !conserved()) trace.conservation_ok = false;

  auto frozen = [&] {
    return std::all_of(states.begin(), states.end(),
                       [&](const ConsensusState& s) { return s.stored_z() == total_z; });
  };

  std::uint64_t step = 0;
  bool done = frozen();
  while (!done && step < trace.bound) {
    ++step;
    auto inboxes = bus.deliver();
    sent_this_step = 0;
    for (NodeId j = 0; j < n; ++j) {
      std::vector<Mass> incoming;
      incoming.reserve(inboxes[j].size());
      for (auto& msg : inboxes[j]) incoming.push_back(std::move(msg.mass));
      if (auto emission = states[j].step(incoming)) {
        send(step, Message{0, j, emission->to, std::move(emission->mass)});
        ++sent_this_step;
      }
    }
    trace.messages_per_step.push_back(sent_this_step);
    trace.at_average.push_back(all_at_average());
    if (options.verify_conservation && !conserved()) trace.conservation_ok = false;
    done = frozen();
  }
  trace.steps_run = step;

  if (done) {
    trace.converged = true;
    std::uint64_t last_off = 0;
    bool any_off = false;
    for (std::uint64_t s = 0; s < trace.at_average.size(); ++s) {
      if (!trace.at_average[s]) {
        last_off = s;
        any_off = true;
      }
    }
    trace.convergence_step = any_off ? last_off + 1 : 0;
    trace.bound_ok = trace.convergence_step <= trace.bound;
  } else {
    trace.failure = "estimates not settled within n*m^2 = " + std::to_string(trace.bound) + " steps";
  }
  if (!trace.conservation_ok && trace.failure.empty()) trace.failure = "mass conservation violated";

  trace.final_estimates.reserve(n);
  for (const auto& s : states) trace.final_estimates.push_back(s.estimate());
  return trace;
}

Fraction distance_objective(const std::vector<IntVector>& observations, const std::vector<ClusterId>& assignments,
                            const CentroidSet& centroids) {
  if (observations.size() != assignments.size()) {
    throw std::invalid_argument("distance_objective: observation/assignment count mismatch");
  }
  Fraction total;
  for (std::size_t j = 0; j < observations.size(); ++j) {
    total += sq_dist_exact(observations[j], centroids.centroids.at(assignments[j]));
  }
  return total;
}

KMeansTrace run_kmeans(const Digraph& g, const std::vector<IntVector>& observations, const CentroidSet& initial,
                       const KMeansOptions& options) {
  const std::size_t n = g.node_count();
  check_vectors(observations, n, "run_kmeans");
  const std::size_t dim = observations.front().size();
  if (initial.k() == 0) throw std::invalid_argument("run_kmeans: need at least one centroid");
  if (initial.k() >= n) throw std::invalid_argument("run_kmeans: k must be smaller than n");
  for (const auto& c : initial.centroids) {
    if (c.dim() != dim) throw std::invalid_argument("run_kmeans: centroid dimension mismatch");
  }
  if (options.max_rounds == 0) throw std::invalid_argument("run_kmeans: max_rounds must be positive");
  const std::size_t diam = diameter(g);  // throws GraphError if not strongly connected
  const std::size_t d_bound = options.d_bound.value_or(diam);
  if (d_bound < diam) {
    throw std::invalid_argument("run_kmeans: diameter bound " + std::to_string(d_bound) +
                                " is below the diameter " + std::to_string(diam));
  }
  const EdgeOrdering ordering = resolve_ordering(g, options.ordering);
  const std::size_t k = initial.k();

  KMeansTrace trace;
  trace.n = n;
  trace.m = g.edge_count();
  trace.k = k;
  trace.dim = dim;
  trace.diameter = diam;
  trace.d_bound = d_bound;
  trace.initial = initial;
  trace.initial.round = 0;
  const std::uint64_t consensus_bound = consensus_step_bound(g);
  const std::uint64_t round_step_cap = consensus_bound + 2 * d_bound;

  std::vector<KMeansNode> nodes;
  nodes.reserve(n);
  for (NodeId j = 0; j < n; ++j) nodes.emplace_back(j, observations[j], orders_of(ordering, j), trace.initial, d_bound);

  MessageBus bus(n);
  std::uint64_t clock = 0;
  trace.messages_per_step.push_back(0);

  RoundRecord current;
  std::vector<IntVector> round_totals_y;
  std::vector<BigInt> round_totals_z;

  auto send = [&](Message msg) {
    trace.consensus_payload.add(msg.mass);
    ++current.consensus_messages;
    ++trace.messages_per_step[clock];
    if (options.record_messages) {
      log_message(trace.log, trace.log_truncated, options.message_log_limit, clock, msg);
    }
    bus.send(std::move(msg));
  };

  auto start_round = [&] {
    current = RoundRecord{};
    current.round = trace.rounds.size() + 1;
    for (auto& node : nodes) {
      for (auto& msg : node.begin_round()) send(std::move(msg));
    }
    current.assignments.resize(n);
    round_totals_y.assign(k, IntVector(dim, BigInt(0)));
    round_totals_z.assign(k, BigInt(0));
    for (NodeId j = 0; j < n; ++j) {
      const ClusterId cl = nodes[j].assignment();
      current.assignments[j] = cl;
      for (std::size_t i = 0; i < dim; ++i) round_totals_y[cl][i] += observations[j][i];
      round_totals_z[cl] += 1;
    }
  };

  auto conserved = [&] {
    std::vector<IntVector> y(k, IntVector(dim, BigInt(0)));
    std::vector<BigInt> z(k, BigInt(0));
    for (const auto& node : nodes) {
      const auto& inst = node.instances();
      for (std::size_t cl = 0; cl < inst.size(); ++cl) {
        for (std::size_t i = 0; i < dim; ++i) y[cl][i] += inst[cl].held().y[i];
        z[cl] += inst[cl].held().z;
      }
    }
    for (const auto& inbox : bus.pending()) {
      for (const auto& msg : inbox) {
        for (std::size_t i = 0; i < dim; ++i) y[msg.label][i] += msg.mass.y[i];
        z[msg.label] += msg.mass.z;
      }
    }
    return y == round_totals_y && z == round_totals_z;
  };

  // Extrema are re-sent only by nodes whose state changed since they last
  // sent it; merging an unchanged state again is a no-op, so results are
  // identical to a full broadcast every step. Message counts below still
  // account for the full broadcast.
  std::vector<char> changed(n, 0);
  std::vector<std::optional<ExtremaState>> outgoing(n);

  start_round();
  bool running = true;
  while (running) {
    ++clock;
    trace.messages_per_step.push_back(0);
    ++current.steps;
    ++trace.total_steps;

    for (auto& node : nodes) node.begin_step();
    if (nodes.front().window_start()) std::fill(changed.begin(), changed.end(), 1);

    std::uint64_t broadcasts = 0;
    for (NodeId j = 0; j < n; ++j) {
      outgoing[j].reset();
      if (!nodes[j].in_round()) continue;
      broadcasts += nodes[j].out_degree();
      if (changed[j]) outgoing[j] = nodes[j].extrema();
    }
    current.extrema_messages += broadcasts;
    trace.extrema_messages += broadcasts;
    trace.messages_per_step[clock] += broadcasts;
    for (NodeId j = 0; j < n; ++j) {
      bool moved = false;
      for (NodeId i : g.in_neighbors(j)) {
        if (outgoing[i] && nodes[j].merge_extrema(*outgoing[i])) moved = true;
      }
      changed[j] = moved ? 1 : 0;
    }

    std::size_t ended = 0;
    for (auto& node : nodes) ended += node.end_window() ? 1 : 0;

    if (ended > 0) {
      if (ended != n) {
        trace.failure = "round " + std::to_string(current.round) + ": only " + std::to_string(ended) + " of " +
                        std::to_string(n) + " nodes detected convergence";
        break;
      }
      for (const auto& node : nodes) {
        if (!node.centroids().same_values(nodes.front().centroids())) {
          trace.failure = "round " + std::to_string(current.round) + ": nodes adopted different centroids";
          running = false;
          break;
        }
      }
      if (!running) break;
      current.dropped_messages = bus.clear();
      current.centroids = nodes.front().centroids();
      current.objective = distance_objective(observations, current.assignments, current.centroids);
      if (!trace.rounds.empty() && frac_less(trace.rounds.back().objective, current.objective)) {
        trace.objective_monotone = false;
      }
      trace.rounds.push_back(std::move(current));

      if (nodes.front().terminated()) {
        trace.terminated = true;
        trace.termination_step = clock;
        break;
      }
      if (trace.rounds.size() >= options.max_rounds) break;
      start_round();
      continue;
    }

    auto inboxes = bus.deliver();
    for (NodeId j = 0; j < n; ++j) {
      for (auto& msg : nodes[j].consensus_step(inboxes[j])) send(std::move(msg));
    }
    if (options.verify_conservation && !conserved()) {
      trace.conservation_ok = false;
      trace.failure = "round " + std::to_string(current.round) + ": mass conservation violated at step " +
                      std::to_string(clock);
      break;
    }
    if (current.steps > round_step_cap) {
      trace.failure = "round " + std::to_string(current.round) + " exceeded " + std::to_string(round_step_cap) +
                      " inner steps";
      break;
    }
  }

  if (trace.terminated) {
    // Keep stepping the terminated network long enough to cover a full
    // stopping window and record what the bus carries.
    trace.post_termination_steps = d_bound + 1;
    for (std::uint64_t s = 0; s < trace.post_termination_steps; ++s) {
      ++clock;
      trace.messages_per_step.push_back(0);
      auto inboxes = bus.deliver();
      std::uint64_t count = 0;
      for (NodeId j = 0; j < n; ++j) {
        nodes[j].begin_step();
        if (nodes[j].in_round()) count += nodes[j].out_degree();
        auto out = nodes[j].consensus_step(inboxes[j]);
        auto restart = nodes[j].begin_round();
        out.insert(out.end(), restart.begin(), restart.end());
        count += out.size();
        for (auto& msg : out) bus.send(std::move(msg));
      }
      trace.messages_per_step[clock] = count;
      trace.post_termination_messages += count;
    }
    trace.silence_ok = trace.post_termination_messages == 0;
  }

  const std::uint64_t T = trace.rounds.size();
  trace.step_bound = T * (d_bound + consensus_bound);
  trace.bound_ok = trace.total_steps <= trace.step_bound;
  return trace;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (n <= 2) fail("n must be greater than 2");
  if (k == 0) fail("k must be positive");
  if (k >= n) fail("k must be smaller than n");
  if (dim == 0) fail("dimension must be positive");
  if (box_lo.empty() || box_hi.empty()) fail("box bounds must not be empty");
  if ((box_lo.size() != 1 && box_lo.size() != dim) || (box_hi.size() != 1 && box_hi.size() != dim)) {
    fail("box bounds need one value or one per dimension");
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (lo(i) > hi(i)) fail("box lower bound exceeds upper bound in dimension " + std::to_string(i + 1));
  }
  if (!(edge_probability >= 0.0 && edge_probability <= 1.0)) fail("edge probability must lie in [0, 1]");
  if (d_bound && *d_bound == 0) fail("diameter bound must be positive");
  if (max_rounds == 0) fail("max_rounds must be positive");
  if (scale <= 0) fail("scale must be positive");
}

Instance generate_instance(const ExperimentConfig& config) {
  config.validate();
  Instance inst;
  inst.graph = generate_random_digraph(config.n, config.edge_probability, config.graph_seed);
  inst.diameter = diameter(inst.graph);

  auto draw_point = [&](std::mt19937_64& rng) {
    IntVector p;
    p.reserve(config.dim);
    for (std::size_t i = 0; i < config.dim; ++i) {
      std::uniform_int_distribution<std::int64_t> coord(config.lo(i) * config.scale, config.hi(i) * config.scale);
      p.emplace_back(coord(rng));
    }
    return p;
  };

  std::mt19937_64 obs_rng(config.observation_seed);
  inst.observations.reserve(config.n);
  for (std::size_t j = 0; j < config.n; ++j) inst.observations.push_back(draw_point(obs_rng));

  std::mt19937_64 cen_rng(config.centroid_seed);
  std::vector<IntVector> chosen;
  for (std::size_t c = 0; c < config.k; ++c) {
    IntVector p = draw_point(cen_rng);
    // Distinct starting centroids when the box allows it.
    for (int attempt = 0; attempt < 1000 && std::find(chosen.begin(), chosen.end(), p) != chosen.end(); ++attempt) {
      p = draw_point(cen_rng);
    }
    chosen.push_back(p);
    inst.initial.centroids.push_back(FractionVector::from_integers(std::move(p)));
  }
  return inst;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ExperimentConfig sweep_config(const ExperimentConfig& base, std::uint64_t master_seed, std::size_t index) {
  ExperimentConfig cfg = base;
  const std::uint64_t root = splitmix64(master_seed ^ splitmix64(index));
  cfg.graph_seed = splitmix64(root + 1);
  cfg.observation_seed = splitmix64(root + 2);
  cfg.centroid_seed = splitmix64(root + 3);
  return cfg;
}

SweepResult sweep(const ExperimentConfig& base, std::size_t num_seeds, std::uint64_t master_seed,
                  std::size_t threads) {
  base.validate();
  if (num_seeds == 0) throw std::invalid_argument("sweep needs at least one seed");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, num_seeds);

  SweepResult result;
  result.runs.resize(num_seeds);
  std::vector<std::string> errors(num_seeds);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < num_seeds; i = next++) {
      SweepRun& run = result.runs[i];
      run.index = i;
      run.config = sweep_config(base, master_seed, i);
      try {
        Instance inst = generate_instance(run.config);
        KMeansOptions opts;
        opts.d_bound = run.config.d_bound;
        opts.max_rounds = run.config.max_rounds;
        run.trace = run_kmeans(inst.graph, inst.observations, inst.initial, opts);
        if (!run.trace.ok()) {
          errors[i] = run.trace.failure.empty()
                          ? (run.trace.terminated ? "check failed" : "no termination within max_rounds")
                          : run.trace.failure;
        }
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < num_seeds; ++i) {
    if (!errors[i].empty()) {
      const auto& cfg = result.runs[i].config;
      throw ProtocolError("sweep run " + std::to_string(i) + " (graph_seed=" + std::to_string(cfg.graph_seed) +
                          ", observation_seed=" + std::to_string(cfg.observation_seed) +
                          ", centroid_seed=" + std::to_string(cfg.centroid_seed) + ") failed: " + errors[i]);
    }
  }

  std::size_t sum = 0;
  result.min_T = result.runs.front().trace.T();
  for (const auto& run : result.runs) {
    const std::size_t T = run.trace.T();
    sum += T;
    result.min_T = std::min(result.min_T, T);
    result.max_T = std::max(result.max_T, T);
    ++result.histogram[T];
  }
  result.mean_T = static_cast<double>(sum) / static_cast<double>(num_seeds);
  result.mean_objective.assign(result.max_T, 0.0);
  for (const auto& run : result.runs) {
    const auto& rounds = run.trace.rounds;
    for (std::size_t t = 0; t < result.max_T; ++t) {
      result.mean_objective[t] += rounds[std::min(t, rounds.size() - 1)].objective.to_double();
    }
  }
  for (auto& v : result.mean_objective) v /= static_cast<double>(num_seeds);
  return result;
}

}  // namespace qkm
