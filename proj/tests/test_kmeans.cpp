#include <gtest/gtest.h>

#include <stdexcept>

#include "qkm/errors.hpp"
#include "qkm/kmeans.hpp"

using namespace qkm;

namespace {

IntVector iv(std::initializer_list<long long> v) {
  IntVector out;
  for (long long x : v) out.emplace_back(x);
  return out;
}

FractionVector fv(std::initializer_list<long long> v, long long den = 1) { return FractionVector(iv(v), den); }

CentroidSet cs(std::vector<FractionVector> c, std::size_t round = 0) { return CentroidSet{std::move(c), round}; }

}  // namespace

TEST(Assign, NearestWins) {
  EXPECT_EQ(assign_cluster(iv({0, 0}), cs({fv({1, 0}), fv({0, 2})})), 0u);
  EXPECT_EQ(assign_cluster(iv({0, 9}), cs({fv({1, 0}), fv({0, 2})})), 1u);
}

TEST(Assign, TieGoesToSmallestIndex) {
  const CentroidSet c = cs({fv({1, 0}), fv({0, 1})});
  EXPECT_EQ(assign_cluster(iv({0, 0}), c), 0u);
  EXPECT_EQ(assign_cluster(iv({0, 0}), c, TieBreak::HighestIndex), 1u);
}

TEST(Assign, ExactFractions) { EXPECT_EQ(assign_cluster(iv({3}), cs({fv({7}, 2), fv({2})})), 0u); }

TEST(InitRound, OneHot) {
  auto m = init_round(iv({5}), 1, 3);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[0], Mass::zero(1));
  EXPECT_EQ(m[1], (Mass{iv({5}), 1}));
  EXPECT_EQ(m[2], Mass::zero(1));
  auto single = init_round(iv({1, 2}), 0, 1);
  EXPECT_EQ(single[0], (Mass{iv({1, 2}), 1}));
  EXPECT_THROW(init_round(iv({1}), 3, 3), std::invalid_argument);
}

TEST(Finalize, RepeatTerminates) {
  const CentroidSet prev = cs({fv({3, 4}), fv({1, 1})}, 2);
  std::vector<WindowOutcome> out{WindowOutcome::agreed(fv({3, 4})), WindowOutcome::agreed(fv({2, 2}, 2))};
  RoundResult r = finalize_round(out, prev);
  EXPECT_TRUE(r.terminated);
  EXPECT_EQ(r.centroids.round, 3u);
}

TEST(Finalize, ChangeContinues) {
  const CentroidSet prev = cs({fv({3, 4})}, 1);
  std::vector<WindowOutcome> out{WindowOutcome::agreed(fv({7, 8}, 2))};
  RoundResult r = finalize_round(out, prev);
  EXPECT_FALSE(r.terminated);
  EXPECT_EQ(r.centroids.centroids[0].str(), "7/2 4/1");
}

TEST(Finalize, EmptyCarriesOver) {
  const CentroidSet prev = cs({fv({1, 1}), fv({9, 9})}, 1);
  std::vector<WindowOutcome> out{WindowOutcome::agreed(fv({2, 2})), WindowOutcome::empty()};
  RoundResult r = finalize_round(out, prev);
  EXPECT_EQ(r.centroids.centroids[1], fv({9, 9}));
}

TEST(Finalize, FirstCalculationNeverTerminates) {
  const CentroidSet initial = cs({fv({3, 4})}, 0);
  std::vector<WindowOutcome> out{WindowOutcome::agreed(fv({3, 4}))};
  EXPECT_FALSE(finalize_round(out, initial).terminated);
}

TEST(Finalize, DisagreedIsProtocolError) {
  const CentroidSet prev = cs({fv({1})}, 1);
  std::vector<WindowOutcome> out{WindowOutcome::disagreed()};
  EXPECT_THROW(finalize_round(out, prev), ProtocolError);
  std::vector<WindowOutcome> wrong_size;
  EXPECT_THROW(finalize_round(wrong_size, prev), std::invalid_argument);
}

TEST(Refinement, Means) {
  std::vector<IntVector> a{iv({2}), iv({4}), iv({6})};
  EXPECT_EQ(refinement_value(a), fv({4}));
  std::vector<IntVector> b{iv({1, 2}), iv({3, 4}), iv({5, 6})};
  EXPECT_EQ(refinement_value(b), fv({3, 4}));
  std::vector<IntVector> c{iv({7})};
  EXPECT_EQ(refinement_value(c), fv({7}));
  EXPECT_THROW(refinement_value(std::vector<IntVector>{}), std::invalid_argument);
}

TEST(Node, BeginRoundSendsOnlyOwnCluster) {
  KMeansNode node(0, iv({10}), {1, 2}, cs({fv({0}), fv({9})}), 2);
  auto msgs = node.begin_round();
  ASSERT_EQ(msgs.size(), 1u);
  EXPECT_EQ(msgs[0].label, 1u);
  EXPECT_EQ(msgs[0].receiver, 1u);
  EXPECT_EQ(msgs[0].mass, (Mass{iv({10}), 1}));
  EXPECT_EQ(node.assignment(), 1u);
  EXPECT_TRUE(node.in_round());
}

TEST(Node, WindowPositions) {
  KMeansNode node(0, iv({1}), {1}, cs({fv({0})}), 3);
  node.begin_round();
  std::vector<int> starts;
  std::vector<int> ends;
  for (int s = 1; s <= 7; ++s) {
    node.begin_step();
    if (node.window_start()) starts.push_back(s);
    if (node.window_end()) ends.push_back(s);
  }
  EXPECT_EQ(starts, (std::vector<int>{1, 4, 7}));
  EXPECT_EQ(ends, (std::vector<int>{3, 6}));
}

TEST(Node, UnitDiameterWindowStartsAndEndsEveryStep) {
  KMeansNode node(0, iv({1}), {1}, cs({fv({0})}), 1);
  node.begin_round();
  node.begin_step();
  EXPECT_TRUE(node.window_start());
  EXPECT_TRUE(node.window_end());
}

TEST(Node, RejectsBadConstruction) {
  EXPECT_THROW(KMeansNode(0, iv({1}), {1}, cs({fv({0})}), 0), std::invalid_argument);
  EXPECT_THROW(KMeansNode(0, iv({1}), {1}, cs({}), 1), std::invalid_argument);
  EXPECT_THROW(KMeansNode(0, iv({1, 2}), {1}, cs({fv({0})}), 1), std::invalid_argument);
}
