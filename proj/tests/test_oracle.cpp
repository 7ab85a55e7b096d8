#include <gtest/gtest.h>

#include <stdexcept>

#include "qkm/oracle.hpp"

using namespace qkm;

namespace {

IntVector iv(std::initializer_list<long long> v) {
  IntVector out;
  for (long long x : v) out.emplace_back(x);
  return out;
}

FractionVector fv(std::initializer_list<long long> v, long long den = 1) { return FractionVector(iv(v), den); }

Digraph cycle(std::size_t n) {
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) edges.push_back({static_cast<NodeId>((i + 1) % n), i});
  return Digraph(n, edges);
}

std::vector<IntVector> scalars(std::initializer_list<long long> v) {
  std::vector<IntVector> out;
  for (long long x : v) out.push_back(iv({x}));
  return out;
}

}  // namespace

TEST(BruteAverage, Examples) {
  FractionVector a = brute_average(scalars({2, 4, 6}));
  EXPECT_EQ(a.numerators(), iv({12}));
  EXPECT_EQ(a.denominator(), 3);
  FractionVector b = brute_average({iv({1, 2}), iv({3, 4}), iv({5, 6})});
  EXPECT_EQ(b.numerators(), iv({9, 12}));
  EXPECT_EQ(b.denominator(), 3);
  FractionVector c = brute_average(scalars({-5, 5}));
  EXPECT_EQ(c.numerators(), iv({0}));
  EXPECT_EQ(c.denominator(), 2);
  EXPECT_THROW(brute_average({}), std::invalid_argument);
}

TEST(Lloyd, HandComputed) {
  LloydResult r = lloyd_reference(scalars({0, 2, 10, 12}), CentroidSet{{fv({1}), fv({11})}, 0});
  EXPECT_TRUE(r.terminated);
  EXPECT_EQ(r.T, 2u);
  EXPECT_EQ(r.sequence.back().centroids[0], fv({1}));
  EXPECT_EQ(r.sequence.back().centroids[1], fv({11}));
}

TEST(Lloyd, SingleCluster) {
  LloydResult r = lloyd_reference(scalars({1, 2, 6}), CentroidSet{{fv({0})}, 0});
  EXPECT_EQ(r.T, 2u);
  EXPECT_EQ(r.sequence[0].centroids[0], fv({3}));
}

TEST(Lloyd, ObjectiveNonIncreasing) {
  std::vector<IntVector> obs;
  for (int j = 0; j < 40; ++j) obs.push_back(iv({(j * 53) % 41, (j * 29) % 31}));
  LloydResult r = lloyd_reference(obs, CentroidSet{{fv({0, 0}), fv({1, 0}), fv({2, 0})}, 0});
  ASSERT_TRUE(r.terminated);
  for (std::size_t t = 1; t < r.objective.size(); ++t) EXPECT_FALSE(frac_less(r.objective[t - 1], r.objective[t]));
}

TEST(Lloyd, MaxRoundsReported) {
  LloydResult r = lloyd_reference(scalars({0, 2, 10, 12}), CentroidSet{{fv({0}), fv({1})}, 0}, 1);
  EXPECT_FALSE(r.terminated);
  EXPECT_EQ(r.T, 1u);
  EXPECT_THROW(lloyd_reference({}, CentroidSet{{fv({0})}, 0}), std::invalid_argument);
}

TEST(Equivalence, IdenticalRunsPass) {
  const auto obs = scalars({0, 2, 10, 12});
  const CentroidSet init{{fv({1}), fv({11})}, 0};
  KMeansTrace t = run_kmeans(cycle(4), obs, init);
  EquivalenceReport rep = check_equivalence(t, lloyd_reference(obs, init));
  EXPECT_TRUE(rep.pass) << rep.message;
  EXPECT_EQ(rep.diverging_round, 0u);
}

TEST(Equivalence, FlippedTieBreakFailsAtTieRound) {
  // Observation 2 is equidistant from both initial centroids.
  const auto obs = scalars({0, 2, 4});
  const CentroidSet init{{fv({1}), fv({3})}, 0};
  KMeansTrace t = run_kmeans(cycle(3), obs, init);
  ASSERT_TRUE(t.ok());
  EXPECT_TRUE(check_equivalence(t, lloyd_reference(obs, init)).pass);
  EquivalenceReport rep = check_equivalence(t, lloyd_reference(obs, init, 100, TieBreak::HighestIndex));
  EXPECT_FALSE(rep.pass);
  EXPECT_EQ(rep.diverging_round, 1u);
  EXPECT_EQ(rep.diverging_cluster, 1u);
}

TEST(Equivalence, EmptyClusterInstancePasses) {
  const auto obs = scalars({7, 7, 7, 7});
  const CentroidSet init{{fv({7}), fv({-20})}, 0};
  KMeansTrace t = run_kmeans(cycle(4), obs, init);
  LloydResult r = lloyd_reference(obs, init);
  EXPECT_TRUE(check_equivalence(t, r).pass);
  EXPECT_EQ(r.sequence.back().centroids[1], fv({-20}));
}

TEST(Equivalence, RoundCountMismatchFails) {
  const auto obs = scalars({0, 2, 10, 12});
  const CentroidSet init{{fv({0}), fv({1})}, 0};
  KMeansTrace t = run_kmeans(cycle(4), obs, init);
  LloydResult r = lloyd_reference(obs, init, 1);
  EquivalenceReport rep = check_equivalence(t, r);
  EXPECT_FALSE(rep.pass);
  EXPECT_EQ(rep.diverging_round, 2u);
}

TEST(FloatLloyd, AgreesOnEasyInstance) {
  FloatLloydResult f = lloyd_float(scalars({0, 2, 10, 12}), CentroidSet{{fv({1}), fv({11})}, 0});
  EXPECT_TRUE(f.terminated);
  EXPECT_EQ(f.T, 2u);
  EXPECT_DOUBLE_EQ(f.sequence.back()[1][0], 11.0);
}
