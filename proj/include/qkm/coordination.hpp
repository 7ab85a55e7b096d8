#pragma once

// Max/min-consensus and the windowed stopping check. Every D steps each node
// snapshots its per-cluster estimates; for the next D steps nodes merge
// per-dimension maxima and minima with their in-neighbors. After D merges
// the extrema are global, so max == min certifies that every node holding an
// estimate agrees on it. A node also flags a cluster as pending when it holds
// untransmitted mass whose ratio differs from its own estimate; such mass
// would still move the average, so a pending cluster never agrees.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qkm/exact.hpp"

namespace qkm {

/// x <- max(own, received...). Works for anything totally ordered by <.
template <class T, class Range>
T max_consensus_step(const T& own, const Range& received) {
  T best = own;
  for (const auto& v : received) {
    if (best < v) best = v;
  }
  return best;
}

template <class T, class Range>
T min_consensus_step(const T& own, const Range& received) {
  T best = own;
  for (const auto& v : received) {
    if (v < best) best = v;
  }
  return best;
}

/// Running extrema for one cluster label. max/min are empty when undefined.
struct ClusterExtrema {
  bool defined = false;
  bool pending = false;
  std::vector<Fraction> max;
  std::vector<Fraction> min;

  friend bool operator==(const ClusterExtrema&, const ClusterExtrema&) = default;
};

class ExtremaState {
 public:
  ExtremaState() = default;
  ExtremaState(std::size_t clusters, std::size_t dim) : clusters_(clusters), dim_(dim) {}

  std::size_t cluster_count() const { return clusters_.size(); }
  std::size_t dim() const { return dim_; }
  const ClusterExtrema& cluster(std::size_t cl) const { return clusters_[cl]; }
  ClusterExtrema& cluster(std::size_t cl) { return clusters_[cl]; }

  /// In-place merge; returns true if anything changed. Throws
  /// std::invalid_argument on cluster-count or dimension mismatch.
  bool merge(const ExtremaState& other);

  friend bool operator==(const ExtremaState&, const ExtremaState&) = default;

 private:
  std::vector<ClusterExtrema> clusters_;
  std::size_t dim_ = 0;
};

/// Window-start snapshot: M = m = estimate where present, undefined otherwise.
ExtremaState snapshot(std::span<const std::optional<FractionVector>> estimates, std::size_t dim);

/// Per-cluster, per-dimension max of M, min of m, OR of defined and pending. Absent values
/// are identities.
ExtremaState extrema_merge(const ExtremaState& own, std::span<const ExtremaState> received);

struct WindowOutcome {
  enum class Kind { Agreed, Disagreed, Empty };
  Kind kind = Kind::Empty;
  std::optional<FractionVector> value;  // set iff Agreed

  static WindowOutcome agreed(FractionVector v) { return {Kind::Agreed, std::move(v)}; }
  static WindowOutcome disagreed() { return {Kind::Disagreed, std::nullopt}; }
  static WindowOutcome empty() { return {Kind::Empty, std::nullopt}; }
};

std::vector<WindowOutcome> window_check(const ExtremaState& state);

/// True when no cluster is Disagreed, i.e. the inner loop may stop.
bool window_allows_stop(std::span<const WindowOutcome> outcomes);

}  // namespace qkm
