#pragma once

// Centralized references for checking the distributed runs.

#include <cstddef>
#include <string>
#include <vector>

#include "qkm/exact.hpp"
#include "qkm/kmeans.hpp"
#include "qkm/sim.hpp"

namespace qkm {

/// Exact (sum of vectors) / count. Throws std::invalid_argument if empty.
FractionVector brute_average(const std::vector<IntVector>& vectors);

struct LloydResult {
  std::vector<CentroidSet> sequence;                // rounds 1..T
  std::vector<std::vector<ClusterId>> assignments;  // used in each round
  std::vector<Fraction> objective;                  // F(T) per round
  std::size_t T = 0;
  bool terminated = false;  // false when max_rounds ran out first
};

/// Centralized Lloyd iteration with the same assignment, refinement, empty
/// cluster and stopping rules as the distributed protocol.
LloydResult lloyd_reference(const std::vector<IntVector>& observations, const CentroidSet& initial,
                            std::size_t max_rounds = 100, TieBreak tie_break = TieBreak::LowestIndex);

struct EquivalenceReport {
  bool pass = false;
  std::size_t diverging_round = 0;  // 1-based; 0 when none
  std::size_t diverging_cluster = 0;  // 1-based; 0 when none or the round counts differ
  std::string message;
};

EquivalenceReport check_equivalence(const KMeansTrace& trace, const LloydResult& oracle);

/// Plain double-precision Lloyd on the same inputs, for comparison only.
struct FloatLloydResult {
  std::vector<std::vector<std::vector<double>>> sequence;
  std::size_t T = 0;
  bool terminated = false;
};

FloatLloydResult lloyd_float(const std::vector<IntVector>& observations, const CentroidSet& initial,
                             std::size_t max_rounds = 100);

}  // namespace qkm
