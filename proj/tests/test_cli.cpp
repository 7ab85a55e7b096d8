#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  fs::path p = fs::path(::testing::TempDir()) / ("qkm_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

Result run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(QKM_BIN) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST(Cli, GenGraphWritesEdgeListAndSummary) {
  fs::path dir = scratch("gen");
  Result r = run("gen-graph --n 100 --p 0.05 --seed 1 -o " + (dir / "g.txt").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "n=100 m=")) << r.out;
  EXPECT_TRUE(contains(r.out, " D=")) << r.out;
  const std::string first = slurp(dir / "g.txt");
  EXPECT_EQ(first.rfind("# config: ", 0), 0u);
  ASSERT_EQ(run("gen-graph --n 100 --p 0.05 --seed 1 -o " + (dir / "h.txt").string(), dir).code, 0);
  EXPECT_EQ(first, slurp(dir / "h.txt"));
}

TEST(Cli, GenGraphRejectsTinyN) {
  fs::path dir = scratch("gen_small");
  Result r = run("gen-graph --n 2 --seed 1 -o " + (dir / "g.txt").string(), dir);
  EXPECT_NE(r.code, 0);
  EXPECT_TRUE(contains(r.err, "n > 2")) << r.err;
}

TEST(Cli, ConsensusThreeCycle) {
  fs::path dir = scratch("cons");
  spit(dir / "g.txt", "3 3\n1 0\n2 1\n0 2\n");
  spit(dir / "v.txt", "2\n4\n6\n");
  Result r = run("consensus --graph " + (dir / "g.txt").string() + " --values " + (dir / "v.txt").string() +
                     " --out-dir " + (dir / "out").string(),
                 dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "estimate at all nodes: 4/1")) << r.out;
  auto s = load_json(dir / "out" / "consensus_summary.json");
  EXPECT_EQ(s["bound_ok"], true);
  EXPECT_EQ(s["schema"], "qkm.consensus/1");
  for (const auto& e : s["estimates"]) EXPECT_EQ(e[0], "4/1");
  EXPECT_TRUE(fs::exists(dir / "out" / "consensus_trace.csv"));
}

TEST(Cli, ConsensusVectorValues) {
  fs::path dir = scratch("cons_vec");
  spit(dir / "g.txt", "3 3\n1 0\n2 1\n0 2\n");
  spit(dir / "v.txt", "1 2\n3 4\n5 7\n");
  Result r = run("consensus --graph " + (dir / "g.txt").string() + " --values " + (dir / "v.txt").string() +
                     " --out-dir " + (dir / "out").string(),
                 dir);
  ASSERT_EQ(r.code, 0) << r.err;
  auto s = load_json(dir / "out" / "consensus_summary.json");
  EXPECT_EQ(s["average"], (nlohmann::json{"3/1", "13/3"}));
}

TEST(Cli, ConsensusRefusesDisconnectedGraph) {
  fs::path dir = scratch("cons_bad");
  spit(dir / "g.txt", "4 4\n1 0\n0 1\n3 2\n2 3\n");
  spit(dir / "v.txt", "1\n2\n3\n4\n");
  Result r = run("consensus --graph " + (dir / "g.txt").string() + " --values " + (dir / "v.txt").string() +
                     " --out-dir " + (dir / "out").string(),
                 dir);
  EXPECT_NE(r.code, 0);
  EXPECT_TRUE(contains(r.err, "graph not strongly connected")) << r.err;
}

TEST(Cli, KMeansWritesAllOutputs) {
  fs::path dir = scratch("km");
  Result r = run("kmeans --n 40 --k 3 --p 0.1 --seed 4 --oracle-check --record-messages --out-dir " +
                     (dir / "out").string(),
                 dir);
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_TRUE(contains(r.out, "equivalence: pass")) << r.out;
  for (const char* f : {"trace.csv", "summary.json", "objective.csv", "trajectories.csv", "assignments.csv",
                        "messages.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
    EXPECT_EQ(slurp(dir / "out" / f).rfind(f == std::string("summary.json") ? "{" : "# config: ", 0), 0u) << f;
  }
  auto s = load_json(dir / "out" / "summary.json");
  EXPECT_EQ(s["schema"], "qkm.kmeans/1");
  EXPECT_EQ(s["config"]["graph_seed"], 4);
  EXPECT_EQ(s["config"]["observation_seed"], 5);
  EXPECT_EQ(s["silence_ok"], true);
  EXPECT_EQ(s["equivalence"]["pass"], true);
}

TEST(Cli, KMeansOracleCheckAcrossSeeds) {
  fs::path dir = scratch("km_seeds");
  for (int seed = 1; seed <= 20; ++seed) {
    Result r = run("kmeans --n 30 --k 3 --p 0.1 --seed " + std::to_string(seed) + " --oracle-check --out-dir " +
                       (dir / "out").string(),
                   dir);
    ASSERT_EQ(r.code, 0) << "seed " << seed << ": " << r.out << r.err;
    EXPECT_TRUE(contains(r.out, "equivalence: pass")) << "seed " << seed;
  }
}

TEST(Cli, KMeansMaxRoundsOne) {
  fs::path dir = scratch("km_max");
  Result r = run("kmeans --n 30 --seed 2 --max-rounds 1 --out-dir " + (dir / "out").string(), dir);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "terminated=false")) << r.out;
  auto s = load_json(dir / "out" / "summary.json");
  EXPECT_EQ(s["terminated"], false);
  EXPECT_EQ(s["T"], 1);
}

TEST(Cli, KMeansFromFiles) {
  fs::path dir = scratch("km_files");
  spit(dir / "g.txt", "4 4\n1 0\n2 1\n3 2\n0 3\n");
  spit(dir / "x.txt", "0\n2\n10\n12\n");
  spit(dir / "c.txt", "1\n11\n");
  Result r = run("kmeans --graph " + (dir / "g.txt").string() + " --observations " + (dir / "x.txt").string() +
                     " --centroids " + (dir / "c.txt").string() + " --oracle-check --out-dir " +
                     (dir / "out").string(),
                 dir);
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  auto s = load_json(dir / "out" / "summary.json");
  EXPECT_EQ(s["T"], 2);
  EXPECT_EQ(s["final_centroids"], (nlohmann::json{{"1/1"}, {"11/1"}}));
}

TEST(Cli, KMeansConfigErrors) {
  fs::path dir = scratch("km_err");
  EXPECT_EQ(run("kmeans --n 5 --k 5 --out-dir " + (dir / "out").string(), dir).code, 2);
  spit(dir / "g.txt", "4 4\n1 0\n2 1\n3 2\n0 3\n");
  Result r = run("kmeans --graph " + (dir / "g.txt").string() + " --k 2 --d-bound 2 --out-dir " +
                     (dir / "out").string(),
                 dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(contains(r.err, "below the diameter")) << r.err;
  EXPECT_EQ(run("kmeans --d-bound zero --out-dir " + (dir / "out").string(), dir).code, 2);
  EXPECT_EQ(run("kmeans --no-such-flag", dir).code, 2);
}

TEST(Cli, ConfigFileWithOverride) {
  fs::path dir = scratch("cfg");
  spit(dir / "run.cfg", "# experiment\nn = 25\nk = 2\np = 0.2\nseed = 9\nmax-rounds = 1\n");
  Result r = run("kmeans --config " + (dir / "run.cfg").string() + " --max-rounds 50 --out-dir " +
                     (dir / "out").string(),
                 dir);
  ASSERT_EQ(r.code, 0) << r.err;
  auto s = load_json(dir / "out" / "summary.json");
  EXPECT_EQ(s["config"]["n"], 25);
  EXPECT_EQ(s["config"]["k"], 2);
  EXPECT_EQ(s["config"]["graph_seed"], 9);
  EXPECT_EQ(s["config"]["max_rounds"], 50);
  spit(dir / "bad.cfg", "bogus = 1\n");
  EXPECT_EQ(run("kmeans --config " + (dir / "bad.cfg").string(), dir).code, 2);
}

TEST(Cli, SweepDeterministic) {
  fs::path dir = scratch("sweep");
  const std::string common = "sweep --n 20 --k 2,3 --p 0.15 --seeds 3 --seed 11 --out-dir ";
  Result a = run(common + (dir / "a").string(), dir);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_TRUE(contains(a.out, "k=2 runs=3 mean_T=")) << a.out;
  EXPECT_TRUE(contains(a.out, "k=3 runs=3 mean_T=")) << a.out;
  Result b = run(common + (dir / "b").string() + " --threads 2", dir);
  ASSERT_EQ(b.code, 0) << b.err;
  for (const char* f : {"runs_k2.csv", "histogram_k2.csv", "mean_objective_k2.csv", "summary_k2.json",
                        "runs_k3.csv", "summary_k3.json"}) {
    ASSERT_TRUE(fs::exists(dir / "a" / f)) << f;
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  auto s = load_json(dir / "a" / "summary_k3.json");
  EXPECT_EQ(s["schema"], "qkm.sweep/1");
  EXPECT_EQ(s["runs"], 3);
  EXPECT_EQ(s["config"]["master_seed"], 11);
}
