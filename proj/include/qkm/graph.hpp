#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qkm {

using NodeId = std::uint32_t;

/// Directed edge (receiver, sender): `receiver` can hear `sender`.
struct Edge {
  NodeId receiver;
  NodeId sender;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Static digraph over dense 0-based node ids. No self-loops, no duplicate
/// edges. Immutable once built.
class Digraph {
 public:
  Digraph() = default;
  /// Throws std::invalid_argument on self-loops, duplicates or ids >= n.
  Digraph(std::size_t n, std::vector<Edge> edges);

  std::size_t node_count() const { return out_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  /// Sorted by (receiver, sender).
  const std::vector<Edge>& edges() const { return edges_; }

  /// Ascending ids.
  std::span<const NodeId> out_neighbors(NodeId j) const { return out_[j]; }
  std::span<const NodeId> in_neighbors(NodeId j) const { return in_[j]; }
  std::size_t out_degree(NodeId j) const { return out_[j].size(); }
  std::size_t in_degree(NodeId j) const { return in_[j].size(); }
  bool has_edge(NodeId sender, NodeId receiver) const;

  friend bool operator==(const Digraph& a, const Digraph& b) {
    return a.node_count() == b.node_count() && a.edges_ == b.edges_;
  }

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> out_;
  std::vector<std::vector<NodeId>> in_;
};

/// Per-node round-robin order over outgoing edges: by_order(j)[e] is the
/// out-neighbor whose order value is e.
class EdgeOrdering {
 public:
  EdgeOrdering() = default;
  explicit EdgeOrdering(std::vector<std::vector<NodeId>> by_order) : by_order_(std::move(by_order)) {}

  std::span<const NodeId> by_order(NodeId j) const { return by_order_[j]; }
  NodeId neighbor_at(NodeId j, std::size_t order) const { return by_order_[j].at(order); }
  /// Order value of the edge j -> l. Throws std::out_of_range if absent.
  std::size_t order_of(NodeId j, NodeId l) const;
  std::size_t node_count() const { return by_order_.size(); }

  friend bool operator==(const EdgeOrdering&, const EdgeOrdering&) = default;

 private:
  std::vector<std::vector<NodeId>> by_order_;
};

bool is_strongly_connected(const Digraph& g);

/// Longest shortest directed path. Throws GraphError if g is not strongly
/// connected.
std::size_t diameter(const Digraph& g);

/// Random Hamiltonian cycle over a seeded permutation of the nodes plus every
/// other ordered pair with probability extra_edge_probability. Throws
/// std::invalid_argument for n <= 2 or a probability outside [0, 1].
Digraph generate_random_digraph(std::size_t n, double extra_edge_probability, std::uint64_t seed);

/// Out-neighbors in ascending id order receive orders 0, 1, ...
EdgeOrdering assign_edge_orders(const Digraph& g);
/// Same bijection property, orders drawn from a seeded shuffle.
EdgeOrdering assign_edge_orders_shuffled(const Digraph& g, std::uint64_t seed);

/// "n m" header followed by m lines "j i" (edge from sender i to receiver j).
/// Lines starting with '#' are skipped. Throws ParseError naming the
/// offending line.
Digraph parse_edge_list(std::string_view text);
std::string serialize_edge_list(const Digraph& g);

}  // namespace qkm
