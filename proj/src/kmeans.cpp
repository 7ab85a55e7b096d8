#include "qkm/kmeans.hpp"

#include <stdexcept>
#include <string>

#include "qkm/errors.hpp"

namespace qkm {

bool CentroidSet::same_values(const CentroidSet& other) const {
  if (k() != other.k()) return false;
  for (std::size_t i = 0; i < k(); ++i) {
    if (!(centroids[i] == other.centroids[i])) return false;
  }
  return true;
}

ClusterId assign_cluster(std::span<const BigInt> x, const CentroidSet& centroids, TieBreak tie_break) {
  if (centroids.k() == 0) throw std::invalid_argument("assign_cluster: no centroids");
  ClusterId best = 0;
  Fraction best_dist = sq_dist_exact(x, centroids.centroids[0]);
  for (ClusterId cl = 1; cl < centroids.k(); ++cl) {
    Fraction dist = sq_dist_exact(x, centroids.centroids[cl]);
    const bool closer = tie_break == TieBreak::LowestIndex ? frac_less(dist, best_dist)
                                                            : !frac_less(best_dist, dist);
    if (closer) {
      best = cl;
      best_dist = std::move(dist);
    }
  }
  return best;
}

std::vector<Mass> init_round(const IntVector& x, ClusterId cluster, std::size_t k) {
  if (cluster >= k) {
    throw std::invalid_argument("init_round: cluster " + std::to_string(cluster) + " out of range for k = " +
                                std::to_string(k));
  }
  std::vector<Mass> masses(k, Mass::zero(x.size()));
  masses[cluster] = Mass{x, BigInt(1)};
  return masses;
}

RoundResult finalize_round(std::span<const WindowOutcome> outcomes, const CentroidSet& previous) {
  if (outcomes.size() != previous.k()) {
    throw std::invalid_argument("finalize_round: " + std::to_string(outcomes.size()) + " outcomes for " +
                                std::to_string(previous.k()) + " clusters");
  }
  RoundResult result;
  result.centroids.round = previous.round + 1;
  result.centroids.centroids.reserve(previous.k());
  for (std::size_t cl = 0; cl < outcomes.size(); ++cl) {
    switch (outcomes[cl].kind) {
      case WindowOutcome::Kind::Disagreed:
        throw ProtocolError("finalize_round: cluster " + std::to_string(cl + 1) + " has not converged");
      case WindowOutcome::Kind::Empty:
        result.centroids.centroids.push_back(previous.centroids[cl]);
        break;
      case WindowOutcome::Kind::Agreed:
        result.centroids.centroids.push_back(outcomes[cl].value->reduced());
        break;
    }
  }
  result.terminated = previous.round >= 1 && result.centroids.same_values(previous);
  return result;
}

FractionVector refinement_value(std::span<const IntVector> members) {
  if (members.empty()) throw std::invalid_argument("refinement_value: empty cluster");
  IntVector sum(members.front().size(), BigInt(0));
  for (const auto& x : members) {
    if (x.size() != sum.size()) throw std::invalid_argument("refinement_value: dimension mismatch");
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += x[i];
  }
  return FractionVector(std::move(sum), BigInt(members.size())).reduced();
}

KMeansNode::KMeansNode(NodeId id, IntVector x, std::vector<NodeId> out_orders, CentroidSet initial,
                       std::size_t d_bound)
    : id_(id),
      x_(std::move(x)),
      out_orders_(std::move(out_orders)),
      centroids_(std::move(initial)),
      d_bound_(d_bound) {
  if (d_bound_ == 0) throw std::invalid_argument("diameter bound must be positive");
  if (centroids_.k() == 0) throw std::invalid_argument("need at least one centroid");
  if (centroids_.dim() != x_.size()) throw std::invalid_argument("observation/centroid dimension mismatch");
}

std::vector<Message> KMeansNode::begin_round() {
  std::vector<Message> out;
  if (flag_) return out;
  assignment_ = assign_cluster(x_, centroids_);
  auto masses = init_round(x_, assignment_, centroids_.k());
  instances_.clear();
  instances_.reserve(masses.size());
  for (ClusterId cl = 0; cl < masses.size(); ++cl) {
    auto started = ConsensusState::init(std::move(masses[cl].y), std::move(masses[cl].z), out_orders_);
    if (started.message) {
      out.push_back(Message{cl, id_, started.message->to, std::move(started.message->mass)});
    }
    instances_.push_back(std::move(started.state));
  }
  extrema_ = ExtremaState(centroids_.k(), x_.size());
  last_outcomes_.clear();
  inner_step_ = 0;
  in_round_ = true;
  return out;
}

bool KMeansNode::window_start() const { return in_round_ && (inner_step_ - 1) % d_bound_ == 0; }

bool KMeansNode::window_end() const { return in_round_ && (inner_step_ - 1) % d_bound_ == d_bound_ - 1; }

void KMeansNode::begin_step() {
  if (flag_ || !in_round_) return;
  ++inner_step_;
  if (window_start()) {
    std::vector<std::optional<FractionVector>> estimates;
    estimates.reserve(instances_.size());
    for (const auto& inst : instances_) estimates.push_back(inst.estimate());
    extrema_ = snapshot(estimates, x_.size());
    for (std::size_t cl = 0; cl < instances_.size(); ++cl) {
      if (!instances_[cl].settled()) extrema_.cluster(cl).pending = true;
    }
  }
}

bool KMeansNode::merge_extrema(const ExtremaState& received) {
  if (flag_ || !in_round_) return false;
  return extrema_.merge(received);
}

bool KMeansNode::end_window() {
  if (!window_end()) return false;
  last_outcomes_ = window_check(extrema_);
  if (!window_allows_stop(last_outcomes_)) return false;
  RoundResult result = finalize_round(last_outcomes_, centroids_);
  centroids_ = std::move(result.centroids);
  flag_ = result.terminated;
  in_round_ = false;
  instances_.clear();
  return true;
}

std::vector<Message> KMeansNode::consensus_step(std::span<const Message> inbox) {
  std::vector<Message> out;
  if (flag_ || !in_round_) return out;
  std::vector<std::vector<Mass>> by_label(instances_.size());
  for (const Message& msg : inbox) {
    if (msg.receiver != id_) throw ProtocolError("message delivered to the wrong node");
    if (msg.label >= instances_.size()) throw ProtocolError("message label out of range");
    by_label[msg.label].push_back(msg.mass);
  }
  for (ClusterId cl = 0; cl < instances_.size(); ++cl) {
    if (auto emission = instances_[cl].step(by_label[cl])) {
      out.push_back(Message{cl, id_, emission->to, std::move(emission->mass)});
    }
  }
  return out;
}

}  // namespace qkm
