#include "gameopt/types.hpp"

namespace gameopt {

Partition::Partition(const std::vector<Index>& lengths) {
  if (lengths.empty()) {
    throw std::invalid_argument("Partition: needs at least one block");
  }
  blocks_.reserve(lengths.size());
  Index offset = 0;
  for (Index len : lengths) {
    if (len < 1) {
      throw std::invalid_argument("Partition: block lengths must be >= 1");
    }
    blocks_.push_back(Block{offset, len});
    offset += len;
  }
  dim_ = offset;
}

const Block& Partition::block(int player) const {
  if (player < 0 || player >= n_players()) {
    throw std::out_of_range("Partition: player index " + std::to_string(player) +
                            " out of range [0, " + std::to_string(n_players()) + ")");
  }
  return blocks_[static_cast<std::size_t>(player)];
}

bool Partition::operator==(const Partition& other) const {
  if (dim_ != other.dim_ || blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].offset != other.blocks_[i].offset ||
        blocks_[i].length != other.blocks_[i].length) {
      return false;
    }
  }
  return true;
}

JointParams::JointParams(Vector values, Partition partition)
    : values_(std::move(values)), partition_(std::move(partition)) {
  if (values_.size() != partition_.dim()) {
    throw std::invalid_argument("JointParams: vector has " + std::to_string(values_.size()) +
                                " entries but partition covers " +
                                std::to_string(partition_.dim()));
  }
}

Eigen::VectorBlock<const Vector> JointParams::block(int player) const {
  const Block& b = partition_.block(player);
  return values_.segment(b.offset, b.length);
}

JointParams JointParams::with_values(Vector values) const {
  return JointParams(std::move(values), partition_);
}

}  // namespace gameopt
