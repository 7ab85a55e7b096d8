#include <gtest/gtest.h>

#include <sstream>

#include "qkm/errors.hpp"
#include "qkm/io.hpp"

using namespace qkm;

namespace {

IntVector iv(std::initializer_list<long long> v) {
  IntVector out;
  for (long long x : v) out.emplace_back(x);
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

Digraph cycle(std::size_t n) {
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) edges.push_back({static_cast<NodeId>((i + 1) % n), i});
  return Digraph(n, edges);
}

}  // namespace

TEST(ParseNumber, Forms) {
  EXPECT_EQ(parse_number("7"), Fraction(7));
  EXPECT_EQ(parse_number("-3/4"), Fraction(-3, 4));
  EXPECT_EQ(parse_number("2.25"), Fraction(9, 4));
  EXPECT_EQ(parse_number("-0.5"), Fraction(-1, 2));
  EXPECT_EQ(parse_number(".5"), Fraction(1, 2));
  EXPECT_EQ(parse_number("0.25"), Fraction(1, 4));
  EXPECT_EQ(parse_number("007"), Fraction(7));
  EXPECT_EQ(parse_number("09/010"), Fraction(9, 10));
  EXPECT_THROW(parse_number("1/0"), ParseError);
  EXPECT_THROW(parse_number("1.2.3"), ParseError);
  EXPECT_THROW(parse_number("x"), ParseError);
  EXPECT_THROW(parse_number("3/-4"), ParseError);
}

TEST(Observations, IntegersCommentsAndScale) {
  auto obs = parse_observations("# header\n1 2\n\n-3 4\n");
  ASSERT_EQ(obs.size(), 2u);
  EXPECT_EQ(obs[1], iv({-3, 4}));
  auto scaled = parse_observations("0.25 1.5\n-0.35 2\n", 10);
  EXPECT_EQ(scaled[0], iv({3, 15}));
  EXPECT_EQ(scaled[1], iv({-4, 20}));
}

TEST(Observations, Errors) {
  try {
    parse_observations("1 2\n3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_observations("# only a comment\n"), ParseError);
  EXPECT_THROW(parse_observations("1 a\n"), ParseError);
  EXPECT_THROW(parse_observations("1\n", 0), std::invalid_argument);
}

TEST(Centroids, RationalTokens) {
  CentroidSet c = parse_centroids("7/2 4\n1 -1/3\n");
  ASSERT_EQ(c.k(), 2u);
  EXPECT_EQ(c.centroids[0].str(), "7/2 4/1");
  EXPECT_EQ(c.centroids[1].str(), "1/1 -1/3");
  CentroidSet s = parse_centroids("0.5\n", 10);
  EXPECT_EQ(s.centroids[0].str(), "5/1");
  EXPECT_THROW(parse_centroids("1 2\n3\n"), ParseError);
}

TEST(Output, KMeansFiles) {
  std::vector<IntVector> obs{iv({0}), iv({2}), iv({10}), iv({12})};
  CentroidSet init{{FractionVector(iv({1}), 1), FractionVector(iv({11}), 1)}, 0};
  KMeansTrace t = run_kmeans(cycle(4), obs, init);
  Json cfg{{"seed", 1}};
  auto trace = lines(kmeans_trace_csv(t, cfg));
  ASSERT_EQ(trace.size(), 2 + t.T());
  EXPECT_EQ(trace[0], "# config: {\"seed\":1}");
  EXPECT_EQ(trace[1], "T,steps,messages,F_num,F_den,c_1,c_2");
  EXPECT_NE(trace[2].find(",4,1,1/1,11/1"), std::string::npos);

  Json summary = kmeans_summary(t, cfg);
  EXPECT_EQ(summary["schema"], "qkm.kmeans/1");
  EXPECT_EQ(summary["config"], cfg);
  EXPECT_EQ(summary["T"], 2);
  EXPECT_EQ(summary["pass"], true);
  EXPECT_EQ(summary["final_centroids"][1][0], "11/1");

  auto traj = lines(trajectories_csv(t, cfg));
  EXPECT_EQ(traj[1], "cluster,T,x1_float");
  EXPECT_EQ(traj.size(), 2 + 2 * (t.T() + 1));
  auto assign = lines(assignments_csv(t, cfg));
  EXPECT_EQ(assign[1], "node,cluster");
  EXPECT_EQ(assign[5], "3,2");
  auto obj = lines(objective_csv(t, cfg));
  EXPECT_EQ(obj[2].substr(0, 6), "1,4,1,");

  EquivalenceReport bad{false, 1, 2, "differs"};
  EXPECT_EQ(kmeans_summary(t, cfg, bad)["pass"], false);
}

TEST(Output, ConsensusFiles) {
  ConsensusOptions opts;
  opts.record_messages = true;
  ConsensusTrace t = run_consensus(cycle(3), {iv({2}), iv({4}), iv({6})}, opts);
  Json cfg{{"command", "consensus"}};
  Json s = consensus_summary(t, cfg);
  EXPECT_EQ(s["schema"], "qkm.consensus/1");
  EXPECT_EQ(s["average"][0], "4/1");
  EXPECT_EQ(s["bound_nm2"], 27);
  EXPECT_EQ(s["bound_ok"], true);
  for (const auto& e : s["estimates"]) EXPECT_EQ(e[0], "4/1");
  auto csv = lines(consensus_trace_csv(t, cfg));
  EXPECT_EQ(csv[1], "step,messages,all_at_average");
  EXPECT_EQ(csv.size(), 2 + t.messages_per_step.size());
  auto msgs = lines(messages_csv(t.log, cfg));
  EXPECT_EQ(msgs[1], "step,sender,receiver,label,z,y");
  EXPECT_EQ(msgs[2], "0,0,1,1,1,2");
}

TEST(Output, FileRoundTrip) {
  const std::string path = ::testing::TempDir() + "/qkm_io_roundtrip.txt";
  write_file(path, "abc\n");
  EXPECT_EQ(read_file(path), "abc\n");
  EXPECT_THROW(read_file(path + ".missing"), std::runtime_error);
}
