#include "qkm/graph.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qkm/errors.hpp"

namespace qkm {

Digraph::Digraph(std::size_t n, std::vector<Edge> edges)
    : edges_(std::move(edges)), out_(n), in_(n) {
  std::sort(edges_.begin(), edges_.end());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.receiver >= n || e.sender >= n) {
      throw std::invalid_argument("edge (" + std::to_string(e.receiver) + ", " +
                                  std::to_string(e.sender) + ") references a node >= " +
                                  std::to_string(n));
    }
    if (e.receiver == e.sender) {
      throw std::invalid_argument("self-loop on node " + std::to_string(e.sender));
    }
    if (i > 0 && edges_[i - 1] == e) {
      throw std::invalid_argument("duplicate edge " + std::to_string(e.sender) + " -> " +
                                  std::to_string(e.receiver));
    }
    out_[e.sender].push_back(e.receiver);
    in_[e.receiver].push_back(e.sender);
  }
  for (auto& v : out_) std::sort(v.begin(), v.end());
  // in_ is already ascending because edges_ is sorted by (receiver, sender).
}

bool Digraph::has_edge(NodeId sender, NodeId receiver) const {
  const auto& outs = out_[sender];
  return std::binary_search(outs.begin(), outs.end(), receiver);
}

std::size_t EdgeOrdering::order_of(NodeId j, NodeId l) const {
  const auto& orders = by_order_.at(j);
  auto it = std::find(orders.begin(), orders.end(), l);
  if (it == orders.end()) {
    throw std::out_of_range("no edge " + std::to_string(j) + " -> " + std::to_string(l));
  }
  return static_cast<std::size_t>(it - orders.begin());
}

namespace {

constexpr std::size_t kUnreached = static_cast<std::size_t>(-1);

// Hop distances from source following edges forward (forward == true) or
// backward.
std::vector<std::size_t> bfs(const Digraph& g, NodeId source, bool forward) {
  std::vector<std::size_t> dist(g.node_count(), kUnreached);
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    auto next = forward ? g.out_neighbors(u) : g.in_neighbors(u);
    for (NodeId v : next) {
      if (dist[v] == kUnreached) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

bool is_strongly_connected(const Digraph& g) {
  if (g.node_count() == 0) return false;
  for (bool forward : {true, false}) {
    auto dist = bfs(g, 0, forward);
    if (std::find(dist.begin(), dist.end(), kUnreached) != dist.end()) return false;
  }
  return true;
}

std::size_t diameter(const Digraph& g) {
  if (!is_strongly_connected(g)) throw GraphError("graph not strongly connected");
  std::size_t best = 0;
  for (NodeId s = 0; s < g.node_count(); ++s) {
    auto dist = bfs(g, s, true);
    best = std::max(best, *std::max_element(dist.begin(), dist.end()));
  }
  return best;
}

Digraph generate_random_digraph(std::size_t n, double extra_edge_probability, std::uint64_t seed) {
  if (n <= 2) throw std::invalid_argument("random digraph needs n > 2, got " + std::to_string(n));
  if (!(extra_edge_probability >= 0.0 && extra_edge_probability <= 1.0)) {
    throw std::invalid_argument("extra edge probability must lie in [0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  // successor[v] is v's out-neighbor on the Hamiltonian backbone.
  std::vector<NodeId> successor(n);
  for (std::size_t i = 0; i < n; ++i) successor[perm[i]] = perm[(i + 1) % n];

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Edge> edges;
  for (NodeId sender = 0; sender < n; ++sender) {
    for (NodeId receiver = 0; receiver < n; ++receiver) {
      if (sender == receiver) continue;
      if (successor[sender] == receiver) {
        edges.push_back({receiver, sender});
        continue;
      }
      // Draw for every non-backbone pair so the stream does not depend on p.
      if (coin(rng) < extra_edge_probability) edges.push_back({receiver, sender});
    }
  }
  return Digraph(n, std::move(edges));
}

EdgeOrdering assign_edge_orders(const Digraph& g) {
  std::vector<std::vector<NodeId>> by_order(g.node_count());
  for (NodeId j = 0; j < g.node_count(); ++j) {
    auto outs = g.out_neighbors(j);
    by_order[j].assign(outs.begin(), outs.end());
  }
  return EdgeOrdering(std::move(by_order));
}

EdgeOrdering assign_edge_orders_shuffled(const Digraph& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<NodeId>> by_order(g.node_count());
  for (NodeId j = 0; j < g.node_count(); ++j) {
    auto outs = g.out_neighbors(j);
    by_order[j].assign(outs.begin(), outs.end());
    std::shuffle(by_order[j].begin(), by_order[j].end(), rng);
  }
  return EdgeOrdering(std::move(by_order));
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

std::size_t parse_count(std::string_view token, std::size_t line_no) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("expected a non-negative integer, got '" + std::string(token) + "'", line_no);
  }
  return value;
}

}  // namespace

Digraph parse_edge_list(std::string_view text) {
  // (line number, content) of every line that is not a '#' comment.
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    const std::size_t first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && line[first] == '#') continue;
    lines.emplace_back(line_no, line);
  }
  while (!lines.empty() && split_ws(lines.back().second).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("missing 'n m' header", 1);

  const std::size_t header_line = lines[0].first;
  auto header = split_ws(lines[0].second);
  if (header.size() != 2) throw ParseError("header must be 'n m'", header_line);
  const std::size_t n = parse_count(header[0], header_line);
  const std::size_t m = parse_count(header[1], header_line);
  if (n == 0) throw ParseError("node count must be positive", header_line);
  std::vector<Edge> edges;
  edges.reserve(m);
  std::set<Edge> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t at = lines[i].first;
    auto tokens = split_ws(lines[i].second);
    if (tokens.size() != 2) throw ParseError("edge line must be 'j i'", at);
    const std::size_t receiver = parse_count(tokens[0], at);
    const std::size_t sender = parse_count(tokens[1], at);
    if (receiver >= n || sender >= n) {
      throw ParseError("node id out of range [0, " + std::to_string(n) + ")", at);
    }
    if (receiver == sender) throw ParseError("self-loop on node " + std::to_string(sender), at);
    Edge e{static_cast<NodeId>(receiver), static_cast<NodeId>(sender)};
    if (!seen.insert(e).second) throw ParseError("duplicate edge", at);
    edges.push_back(e);
  }
  if (edges.size() != m) {
    throw ParseError("header declares " + std::to_string(m) + " edges but " + std::to_string(edges.size()) +
                         " edge lines follow",
                     edges.size() < m ? line_no + 1 : lines[m + 1].first);
  }
  return Digraph(n, std::move(edges));
}

std::string serialize_edge_list(const Digraph& g) {
  std::ostringstream out;
  out << g.node_count() << ' ' << g.edge_count() << '\n';
  for (const Edge& e : g.edges()) out << e.receiver << ' ' << e.sender << '\n';
  return out.str();
}

}  // namespace qkm
