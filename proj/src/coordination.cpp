#include "qkm/coordination.hpp"

#include <stdexcept>
#include <string>

namespace qkm {

bool ExtremaState::merge(const ExtremaState& other) {
  if (other.cluster_count() != cluster_count() || other.dim_ != dim_) {
    throw std::invalid_argument("extrema merge: expected " + std::to_string(cluster_count()) +
                                " clusters of dim " + std::to_string(dim_) + ", got " +
                                std::to_string(other.cluster_count()) + " of dim " +
                                std::to_string(other.dim_));
  }
  bool changed = false;
  for (std::size_t cl = 0; cl < clusters_.size(); ++cl) {
    const ClusterExtrema& theirs = other.clusters_[cl];
    if (!theirs.defined) continue;
    ClusterExtrema& mine = clusters_[cl];
    if (!mine.defined) {
      mine = theirs;
      changed = true;
      continue;
    }
    if (theirs.pending && !mine.pending) {
      mine.pending = true;
      changed = true;
    }
    for (std::size_t i = 0; i < dim_; ++i) {
      if (frac_less(mine.max[i], theirs.max[i])) {
        mine.max[i] = theirs.max[i];
        changed = true;
      }
      if (frac_less(theirs.min[i], mine.min[i])) {
        mine.min[i] = theirs.min[i];
        changed = true;
      }
    }
  }
  return changed;
}

ExtremaState snapshot(std::span<const std::optional<FractionVector>> estimates, std::size_t dim) {
  ExtremaState state(estimates.size(), dim);
  for (std::size_t cl = 0; cl < estimates.size(); ++cl) {
    if (!estimates[cl]) continue;
    if (estimates[cl]->dim() != dim) throw std::invalid_argument("snapshot: estimate dimension mismatch");
    ClusterExtrema& ex = state.cluster(cl);
    ex.defined = true;
    ex.max = estimates[cl]->reduced().components();
    ex.min = ex.max;
  }
  return state;
}

ExtremaState extrema_merge(const ExtremaState& own, std::span<const ExtremaState> received) {
  ExtremaState out = own;
  for (const auto& r : received) out.merge(r);
  return out;
}

std::vector<WindowOutcome> window_check(const ExtremaState& state) {
  std::vector<WindowOutcome> outcomes;
  outcomes.reserve(state.cluster_count());
  for (std::size_t cl = 0; cl < state.cluster_count(); ++cl) {
    const ClusterExtrema& ex = state.cluster(cl);
    if (!ex.defined) {
      outcomes.push_back(WindowOutcome::empty());
      continue;
    }
    bool equal = !ex.pending;
    for (std::size_t i = 0; i < state.dim() && equal; ++i) equal = frac_equal(ex.max[i], ex.min[i]);
    outcomes.push_back(equal ? WindowOutcome::agreed(FractionVector::from_components(ex.max))
                             : WindowOutcome::disagreed());
  }
  return outcomes;
}

bool window_allows_stop(std::span<const WindowOutcome> outcomes) {
  for (const auto& o : outcomes) {
    if (o.kind == WindowOutcome::Kind::Disagreed) return false;
  }
  return true;
}

}  // namespace qkm
