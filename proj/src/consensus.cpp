#include "qkm/consensus.hpp"

#include <algorithm>
#include <stdexcept>

#include "qkm/errors.hpp"

namespace qkm {

bool Mass::is_zero() const {
  return z == 0 && std::all_of(y.begin(), y.end(), [](const BigInt& v) { return v == 0; });
}

bool ConsensusState::settled() const {
  if (held_.is_zero()) return true;
  if (held_.z == 0 || !estimate_) return false;
  return FractionVector(held_.y, held_.z) == *estimate_;
}

ConsensusState::ConsensusState(Mass held, std::vector<NodeId> out_orders)
    : held_(std::move(held)),
      stored_y_(held_.y.size(), BigInt(0)),
      stored_z_(0),
      out_orders_(std::move(out_orders)) {}

ConsensusState::Started ConsensusState::init(IntVector y0, BigInt z0, std::vector<NodeId> out_orders) {
  if (z0 != 0 && z0 != 1) throw std::invalid_argument("initial z must be 0 or 1");
  if (out_orders.empty()) throw std::invalid_argument("node has no out-neighbors");
  Mass mass{std::move(y0), std::move(z0)};
  if (mass.z == 0 && !mass.is_zero()) {
    throw std::invalid_argument("initial z = 0 requires an all-zero y");
  }
  ConsensusState state(std::move(mass), std::move(out_orders));
  if (state.held_.z == 0) return {std::move(state), std::nullopt};
  Emission first = state.transmit();
  return {std::move(state), std::move(first)};
}

void ConsensusState::absorb(std::span<const Mass> incoming) {
  for (const Mass& m : incoming) {
    if (m.y.size() != dim()) {
      throw std::invalid_argument("absorb: mass dimension " + std::to_string(m.y.size()) +
                                  " != " + std::to_string(dim()));
    }
  }
  for (const Mass& m : incoming) {
    for (std::size_t i = 0; i < dim(); ++i) held_.y[i] += m.y[i];
    held_.z += m.z;
  }
}

Decision ConsensusState::trigger() const {
  if (held_.is_zero()) return Decision::Hold;
  if (held_.z > stored_z_) return Decision::Transmit;  // C1
  if (held_.z < stored_z_) return Decision::Hold;      // C2
  for (std::size_t i = 0; i < dim(); ++i) {
    if (held_.y[i] > stored_y_[i]) return Decision::Transmit;  // C3
    if (held_.y[i] < stored_y_[i]) return Decision::Hold;      // C5
    // C4: equal in this dimension, move on.
  }
  return Decision::Transmit;
}

Emission ConsensusState::emit() {
  if (trigger() != Decision::Transmit) throw ProtocolError("emit called while trigger holds");
  return transmit();
}

std::optional<Emission> ConsensusState::step(std::span<const Mass> incoming) {
  absorb(incoming);
  if (trigger() == Decision::Hold) return std::nullopt;
  return transmit();
}

Emission ConsensusState::transmit() {
  stored_y_ = held_.y;
  stored_z_ = held_.z;
  estimate_ = FractionVector(stored_y_, stored_z_).reduced();
  Emission out{out_orders_[e_], std::move(held_)};
  held_ = Mass::zero(stored_y_.size());
  ++tr_;
  e_ = static_cast<std::size_t>(tr_ % out_orders_.size());
  return out;
}

}  // namespace qkm
