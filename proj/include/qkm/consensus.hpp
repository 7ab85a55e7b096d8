#pragma once

// Per-node state machine for multidimensional exact quantized average
// consensus by mass accumulation. A node keeps the mass it currently holds,
// the last mass it transmitted (its stored state) and an exact estimate
// stored_y / stored_z. It forwards held mass only when that mass is
// lexicographically at least the stored one, which lets a single leading
// mass collect everything and then circulate.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qkm/exact.hpp"
#include "qkm/graph.hpp"

namespace qkm {

using ClusterId = std::uint32_t;

struct Mass {
  IntVector y;
  BigInt z;

  static Mass zero(std::size_t dim) { return Mass{IntVector(dim, BigInt(0)), BigInt(0)}; }
  bool is_zero() const;
  friend bool operator==(const Mass&, const Mass&) = default;
};

/// A consensus payload on the wire. label is the cluster instance.
struct Message {
  ClusterId label = 0;
  NodeId sender = 0;
  NodeId receiver = 0;
  Mass mass;
};

/// Where emit() sends the mass.
struct Emission {
  NodeId to;
  Mass mass;
};

enum class Decision { Transmit, Hold };

class ConsensusState {
 public:
  struct Started;

  /// z0 must be 0 or 1, and z0 == 0 requires an all-zero y0. out_orders lists
  /// out-neighbors by order value and must be non-empty.
  static Started init(IntVector y0, BigInt z0, std::vector<NodeId> out_orders);

  /// Adds every incoming mass to the held mass.
  void absorb(std::span<const Mass> incoming);
  /// Event trigger: lexicographic (z, y_1, ..., y_d) comparison of held vs
  /// stored, with all-zero held mass never transmitted.
  Decision trigger() const;
  /// Throws ProtocolError if trigger() says Hold.
  Emission emit();
  /// absorb, trigger, and emit when triggered.
  std::optional<Emission> step(std::span<const Mass> incoming);

  std::size_t dim() const { return held_.y.size(); }
  const Mass& held() const { return held_; }
  const IntVector& stored_y() const { return stored_y_; }
  const BigInt& stored_z() const { return stored_z_; }
  /// Present iff stored_z > 0; reduced.
  const std::optional<FractionVector>& estimate() const { return estimate_; }
  /// True when the held mass is zero or has the same ratio as the estimate.
  bool settled() const;
  std::uint64_t transmissions() const { return tr_; }
  std::size_t next_order() const { return e_; }
  std::span<const NodeId> out_orders() const { return out_orders_; }

 private:
  ConsensusState(Mass held, std::vector<NodeId> out_orders);
  Emission transmit();

  Mass held_;
  IntVector stored_y_;
  BigInt stored_z_;
  std::optional<FractionVector> estimate_;
  std::uint64_t tr_ = 0;
  std::size_t e_ = 0;
  std::vector<NodeId> out_orders_;
};

struct ConsensusState::Started {
  ConsensusState state;
  std::optional<Emission> message;
};

}  // namespace qkm
