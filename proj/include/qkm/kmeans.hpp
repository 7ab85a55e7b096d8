#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qkm/consensus.hpp"
#include "qkm/coordination.hpp"
#include "qkm/exact.hpp"
#include "qkm/graph.hpp"

namespace qkm {

/// Centroids after `round` calculations; round 0 is the shared initial set.
struct CentroidSet {
  std::vector<FractionVector> centroids;
  std::size_t round = 0;

  std::size_t k() const { return centroids.size(); }
  std::size_t dim() const { return centroids.empty() ? 0 : centroids.front().dim(); }
  /// Value equality of every centroid; the round index is ignored.
  bool same_values(const CentroidSet& other) const;
};

enum class TieBreak { LowestIndex, HighestIndex };

/// Nearest centroid under exact squared distance. Ties go to the lowest index
/// unless tie_break says otherwise.
ClusterId assign_cluster(std::span<const BigInt> x, const CentroidSet& centroids,
                         TieBreak tie_break = TieBreak::LowestIndex);

/// Initial (y, z) per labeled instance: (x, 1) for `cluster`, zero mass for
/// the rest. Throws std::invalid_argument if cluster >= k.
std::vector<Mass> init_round(const IntVector& x, ClusterId cluster, std::size_t k);

struct RoundResult {
  CentroidSet centroids;
  bool terminated = false;
};

/// New centroid per cluster from the window outcome (Empty keeps the previous
/// one). Terminates when a computed set repeats the previously computed set,
/// so the first calculation never terminates. Throws ProtocolError on any
/// Disagreed outcome.
RoundResult finalize_round(std::span<const WindowOutcome> outcomes, const CentroidSet& previous);

/// Exact mean of the members. Throws std::invalid_argument if empty.
FractionVector refinement_value(std::span<const IntVector> members);

/// One participant of the distributed clustering: k labeled consensus
/// instances plus the windowed extrema used for stopping. The simulator
/// drives it phase by phase within each synchronous step.
class KMeansNode {
 public:
  KMeansNode(NodeId id, IntVector x, std::vector<NodeId> out_orders, CentroidSet initial,
             std::size_t d_bound);

  /// Assignment and labeled consensus initialization. Returns the initial
  /// transmissions (none once terminated).
  std::vector<Message> begin_round();

  /// Advances the inner step counter; snapshots estimates at window start.
  void begin_step();
  bool window_start() const;
  bool window_end() const;

  const ExtremaState& extrema() const { return extrema_; }
  /// Merge of neighbor extrema received this step.
  bool merge_extrema(const ExtremaState& received);

  /// At window end: checks the extrema and, when no cluster disagrees,
  /// adopts the agreed centroids. Returns true if the round finished here.
  bool end_window();

  /// Absorb/trigger/emit for every labeled instance. inbox holds messages
  /// addressed to this node.
  std::vector<Message> consensus_step(std::span<const Message> inbox);

  NodeId id() const { return id_; }
  const IntVector& observation() const { return x_; }
  ClusterId assignment() const { return assignment_; }
  const CentroidSet& centroids() const { return centroids_; }
  bool terminated() const { return flag_; }
  bool in_round() const { return in_round_; }
  std::size_t inner_step() const { return inner_step_; }
  std::size_t out_degree() const { return out_orders_.size(); }
  const std::vector<ConsensusState>& instances() const { return instances_; }
  const std::vector<WindowOutcome>& last_outcomes() const { return last_outcomes_; }

 private:
  NodeId id_;
  IntVector x_;
  std::vector<NodeId> out_orders_;
  CentroidSet centroids_;
  std::size_t d_bound_;
  ClusterId assignment_ = 0;
  bool flag_ = false;
  bool in_round_ = false;
  std::size_t inner_step_ = 0;
  std::vector<ConsensusState> instances_;
  ExtremaState extrema_;
  std::vector<WindowOutcome> last_outcomes_;
};

}  // namespace qkm
