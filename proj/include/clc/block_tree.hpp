#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clc/types.hpp"

namespace clc {

struct Block {
  BlockId id = kNoBlock;
  BlockId parent = kNoBlock;
  std::uint32_t height = 0;
  SimTime mine_time = 0.0;
  NodeId miner = kNoNode;
  MinerKind miner_kind = MinerKind::honest;
};

// Append-only block store. Ids index a dense vector; gaps are allowed but
// every block's parent must already be present.
class BlockTree {
 public:
  BlockTree() = default;

  // Tree holding only the genesis block (id kGenesis, time 0).
  static BlockTree with_genesis();

  // Inserts `block`, recomputing its height from the parent. The first
  // block must be a root (parent kNoBlock); later roots are rejected.
  const Block& append(const Block& block);

  bool contains(BlockId id) const {
    return id < entries_.size() && entries_[id].present;
  }
  const Block& at(BlockId id) const;
  std::span<const BlockId> children(BlockId id) const;
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  BlockId root() const { return root_; }
  // One past the largest id in use.
  BlockId next_id() const { return static_cast<BlockId>(entries_.size()); }

  // Ancestor of `id` at `height` (which must not exceed id's height).
  BlockId ancestor_at_height(BlockId id, std::uint32_t height) const;

 private:
  struct Entry {
    Block block;
    BlockId skip = kNoBlock;
    std::vector<BlockId> children;
    bool present = false;
  };
  const Entry& entry(BlockId id) const;

  std::vector<Entry> entries_;
  std::size_t count_ = 0;
  BlockId root_ = kNoBlock;
};

// A chain is denoted by its tip; resolved against a tree it is the unique
// path from the root to the tip.
struct Chain {
  BlockId tip = kGenesis;
  friend bool operator==(Chain, Chain) = default;
};

std::uint32_t chain_length(const BlockTree& tree, Chain c);

// Reflexive: a block is its own descendant.
bool is_descendant(const BlockTree& tree, BlockId ancestor, BlockId descendant);

// Drops the last k blocks. Saturates at the root.
Chain drop_last(const BlockTree& tree, Chain c, std::uint32_t k);

// Block with exactly k descendants in the chain; the tip is 0-deep.
BlockId block_at_depth(const BlockTree& tree, Chain c, std::uint32_t k);

bool is_prefix(Chain c1, Chain c2, const BlockTree& tree);

Chain common_prefix(Chain c1, Chain c2, const BlockTree& tree);

// Root..tip inclusive.
std::vector<BlockId> chain_blocks(const BlockTree& tree, Chain c);

}  // namespace clc
