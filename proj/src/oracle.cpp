#include "qkm/oracle.hpp"

#include <stdexcept>
#include <string>

namespace qkm {

FractionVector brute_average(const std::vector<IntVector>& vectors) {
  if (vectors.empty()) throw std::invalid_argument("brute_average: empty set");
  IntVector sum(vectors.front().size(), BigInt(0));
  for (const auto& v : vectors) {
    if (v.size() != sum.size()) throw std::invalid_argument("brute_average: dimension mismatch");
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
  }
  return FractionVector(std::move(sum), BigInt(vectors.size()));
}

LloydResult lloyd_reference(const std::vector<IntVector>& observations, const CentroidSet& initial,
                            std::size_t max_rounds, TieBreak tie_break) {
  if (observations.empty()) throw std::invalid_argument("lloyd_reference: no observations");
  if (initial.k() == 0) throw std::invalid_argument("lloyd_reference: no centroids");
  if (max_rounds == 0) throw std::invalid_argument("lloyd_reference: max_rounds must be positive");
  const std::size_t k = initial.k();

  LloydResult result;
  CentroidSet current = initial;
  current.round = 0;
  while (result.T < max_rounds) {
    std::vector<ClusterId> assignment(observations.size());
    std::vector<std::vector<IntVector>> members(k);
    for (std::size_t j = 0; j < observations.size(); ++j) {
      assignment[j] = assign_cluster(observations[j], current, tie_break);
      members[assignment[j]].push_back(observations[j]);
    }
    std::vector<WindowOutcome> outcomes;
    outcomes.reserve(k);
    for (std::size_t cl = 0; cl < k; ++cl) {
      outcomes.push_back(members[cl].empty() ? WindowOutcome::empty()
                                             : WindowOutcome::agreed(refinement_value(members[cl])));
    }
    RoundResult round = finalize_round(outcomes, current);
    result.objective.push_back(distance_objective(observations, assignment, round.centroids));
    result.assignments.push_back(std::move(assignment));
    result.sequence.push_back(round.centroids);
    ++result.T;
    current = std::move(round.centroids);
    if (round.terminated) {
      result.terminated = true;
      break;
    }
  }
  return result;
}

EquivalenceReport check_equivalence(const KMeansTrace& trace, const LloydResult& oracle) {
  EquivalenceReport report;
  const std::size_t common = std::min(trace.rounds.size(), oracle.sequence.size());
  for (std::size_t r = 0; r < common; ++r) {
    const CentroidSet& a = trace.rounds[r].centroids;
    const CentroidSet& b = oracle.sequence[r];
    if (a.k() != b.k()) {
      report.diverging_round = r + 1;
      report.message = "round " + std::to_string(r + 1) + ": cluster counts differ";
      return report;
    }
    for (std::size_t cl = 0; cl < a.k(); ++cl) {
      if (!(a.centroids[cl] == b.centroids[cl])) {
        report.diverging_round = r + 1;
        report.diverging_cluster = cl + 1;
        report.message = "round " + std::to_string(r + 1) + ", cluster " + std::to_string(cl + 1) +
                         ": distributed " + a.centroids[cl].str() + " vs reference " + b.centroids[cl].str();
        return report;
      }
    }
  }
  if (trace.rounds.size() != oracle.sequence.size() || trace.terminated != oracle.terminated) {
    report.diverging_round = common + 1;
    report.message = "round counts differ: distributed T=" + std::to_string(trace.rounds.size()) +
                     (trace.terminated ? "" : " (unterminated)") + ", reference T=" +
                     std::to_string(oracle.sequence.size()) + (oracle.terminated ? "" : " (unterminated)");
    return report;
  }
  report.pass = true;
  report.message = "identical over " + std::to_string(common) + " rounds";
  return report;
}

FloatLloydResult lloyd_float(const std::vector<IntVector>& observations, const CentroidSet& initial,
                             std::size_t max_rounds) {
  if (observations.empty() || initial.k() == 0) throw std::invalid_argument("lloyd_float: empty input");
  const std::size_t k = initial.k();
  const std::size_t dim = initial.dim();
  std::vector<std::vector<double>> points;
  for (const auto& x : observations) {
    std::vector<double> p;
    for (const auto& v : x) p.push_back(v.convert_to<double>());
    points.push_back(std::move(p));
  }
  std::vector<std::vector<double>> current;
  for (const auto& c : initial.centroids) current.push_back(c.to_doubles());

  FloatLloydResult result;
  while (result.T < max_rounds) {
    std::vector<std::vector<double>> sum(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> count(k, 0);
    for (const auto& p : points) {
      std::size_t best = 0;
      double best_d = 0.0;
      for (std::size_t cl = 0; cl < k; ++cl) {
        double d = 0.0;
        for (std::size_t i = 0; i < dim; ++i) d += (p[i] - current[cl][i]) * (p[i] - current[cl][i]);
        if (cl == 0 || d < best_d) {
          best = cl;
          best_d = d;
        }
      }
      for (std::size_t i = 0; i < dim; ++i) sum[best][i] += p[i];
      ++count[best];
    }
    auto next = current;
    for (std::size_t cl = 0; cl < k; ++cl) {
      if (count[cl] == 0) continue;
      for (std::size_t i = 0; i < dim; ++i) next[cl][i] = sum[cl][i] / static_cast<double>(count[cl]);
    }
    ++result.T;
    result.sequence.push_back(next);
    const bool same = next == current;
    current = std::move(next);
    if (same && result.T > 1) {
      result.terminated = true;
      break;
    }
  }
  return result;
}

}  // namespace qkm
