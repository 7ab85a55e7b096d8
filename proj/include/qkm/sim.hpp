#pragma once

// Synchronous lock-step simulation. Consensus masses sent at step t are
// delivered at step t+1; extrema are exchanged as one synchronous
// max/min-consensus round per step. Runs are single-threaded and fully
// deterministic for a given input.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qkm/consensus.hpp"
#include "qkm/exact.hpp"
#include "qkm/graph.hpp"
#include "qkm/kmeans.hpp"

namespace qkm {

struct MessageLogEntry {
  std::uint64_t step = 0;
  NodeId sender = 0;
  NodeId receiver = 0;
  ClusterId label = 0;
  Mass mass;
};

/// Messages sent at step t, grouped for delivery at step t+1.
class MessageBus {
 public:
  explicit MessageBus(std::size_t nodes) : inbox_(nodes) {}

  void send(Message msg);
  /// Hands over everything queued and leaves the bus empty. Per receiver,
  /// messages are in send order.
  std::vector<std::vector<Message>> deliver();
  /// Drops everything in flight; returns how many messages were dropped.
  std::size_t clear();

  std::size_t in_flight() const { return in_flight_; }
  const std::vector<std::vector<Message>>& pending() const { return inbox_; }

 private:
  std::vector<std::vector<Message>> inbox_;
  std::size_t in_flight_ = 0;
};

struct PayloadStats {
  std::uint64_t messages = 0;
  std::uint64_t bits = 0;
  std::size_t max_bits = 0;

  void add(const Mass& mass);
};

struct ConsensusOptions {
  std::optional<EdgeOrdering> ordering;  // canonical when absent
  bool verify_conservation = true;
  bool record_messages = false;
  std::size_t message_log_limit = 100000;
};

struct ConsensusTrace {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t dim = 0;
  FractionVector average;
  std::uint64_t bound = 0;              // n * m^2
  std::uint64_t steps_run = 0;          // until every node stores the full mass
  std::uint64_t convergence_step = 0;   // S_t
  bool converged = false;
  bool bound_ok = false;
  bool conservation_ok = true;
  PayloadStats payload;
  std::vector<std::uint64_t> messages_per_step;  // index 0 is initialization
  std::vector<bool> at_average;                  // all estimates == average, per step
  std::vector<std::optional<FractionVector>> final_estimates;
  std::vector<MessageLogEntry> log;
  bool log_truncated = false;
  std::string failure;

  bool ok() const { return converged && bound_ok && conservation_ok && failure.empty(); }
};

/// Multidimensional exact quantized average consensus with every z0 = 1.
/// Runs until every node stores the full network mass (after which estimates
/// can no longer change) or the n*m^2 step bound is exhausted. Throws
/// GraphError for graphs that are not strongly connected and
/// std::invalid_argument for inconsistent inputs.
ConsensusTrace run_consensus(const Digraph& g, const std::vector<IntVector>& initial,
                             const ConsensusOptions& options = {});

struct KMeansOptions {
  std::optional<std::size_t> d_bound;  // exact diameter when absent
  std::size_t max_rounds = 100;
  std::optional<EdgeOrdering> ordering;
  bool verify_conservation = true;
  bool record_messages = false;
  std::size_t message_log_limit = 100000;
};

struct RoundRecord {
  std::size_t round = 0;
  std::uint64_t steps = 0;
  std::uint64_t consensus_messages = 0;
  std::uint64_t extrema_messages = 0;
  std::uint64_t dropped_messages = 0;
  std::vector<ClusterId> assignments;  // per node, used during this round
  CentroidSet centroids;               // result of this round
  Fraction objective;                  // F(T)
};

struct KMeansTrace {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t dim = 0;
  std::size_t diameter = 0;
  std::size_t d_bound = 0;
  CentroidSet initial;
  std::vector<RoundRecord> rounds;
  std::uint64_t total_steps = 0;       // C_t
  std::uint64_t step_bound = 0;        // T * (D_bound + n*m^2)
  std::uint64_t termination_step = 0;  // global step at which all flags were set
  std::uint64_t post_termination_messages = 0;
  std::uint64_t post_termination_steps = 0;
  bool terminated = false;
  bool bound_ok = false;
  bool conservation_ok = true;
  bool objective_monotone = true;
  bool silence_ok = true;
  PayloadStats consensus_payload;
  std::uint64_t extrema_messages = 0;
  std::vector<std::uint64_t> messages_per_step;  // global steps, 0 = first initialization
  std::vector<MessageLogEntry> log;
  bool log_truncated = false;
  std::string failure;

  std::size_t T() const { return rounds.size(); }
  bool checks_ok() const {
    return bound_ok && conservation_ok && objective_monotone && silence_ok && failure.empty();
  }
  bool ok() const { return terminated && checks_ok(); }
};

/// Distributed clustering. Throws GraphError / std::invalid_argument on
/// precondition violations (not strongly connected, k >= n, D_bound below
/// the diameter, dimension mismatches). Protocol problems discovered during
/// the run are reported through the trace.
KMeansTrace run_kmeans(const Digraph& g, const std::vector<IntVector>& observations,
                       const CentroidSet& initial, const KMeansOptions& options = {});

/// sum over clusters of squared distances from members to their centroid.
Fraction distance_objective(const std::vector<IntVector>& observations,
                            const std::vector<ClusterId>& assignments, const CentroidSet& centroids);

struct ExperimentConfig {
  std::size_t n = 100;
  std::size_t k = 3;
  std::size_t dim = 2;
  std::vector<std::int64_t> box_lo{0};  // one value per dimension, or one for all
  std::vector<std::int64_t> box_hi{50};
  std::uint64_t graph_seed = 1;
  std::uint64_t observation_seed = 2;
  std::uint64_t centroid_seed = 3;
  double edge_probability = 0.05;
  std::optional<std::size_t> d_bound;  // auto when absent
  std::size_t max_rounds = 100;
  std::int64_t scale = 1;

  std::int64_t lo(std::size_t i) const { return box_lo.size() == 1 ? box_lo[0] : box_lo.at(i); }
  std::int64_t hi(std::size_t i) const { return box_hi.size() == 1 ? box_hi[0] : box_hi.at(i); }
  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

struct Instance {
  Digraph graph;
  std::vector<IntVector> observations;
  CentroidSet initial;
  std::size_t diameter = 0;
};

/// Random graph plus observations and distinct initial centroids drawn
/// uniformly from the box (scaled by `scale`).
Instance generate_instance(const ExperimentConfig& config);

struct SweepRun {
  std::size_t index = 0;
  ExperimentConfig config;
  KMeansTrace trace;
};

struct SweepResult {
  std::vector<SweepRun> runs;
  double mean_T = 0.0;
  std::size_t min_T = 0;
  std::size_t max_T = 0;
  std::map<std::size_t, std::size_t> histogram;
  /// Mean F(T) over runs for T = 1..max_T; runs that already stopped
  /// contribute their final value.
  std::vector<double> mean_objective;
};

/// Seeds for run i are derived from master_seed, so the result depends only
/// on (base, num_seeds, master_seed). threads == 0 picks hardware
/// concurrency. Throws ProtocolError naming the first failing run.
SweepResult sweep(const ExperimentConfig& base, std::size_t num_seeds, std::uint64_t master_seed,
                  std::size_t threads = 1);

/// Per-run config for sweep index i.
ExperimentConfig sweep_config(const ExperimentConfig& base, std::uint64_t master_seed, std::size_t index);

}  // namespace qkm
