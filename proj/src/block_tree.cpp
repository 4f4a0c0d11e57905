#include "clc/block_tree.hpp"

#include <algorithm>
#include <string>

#include "clc/error.hpp"

namespace clc {
namespace {

// Same skip layout as Bitcoin's CBlockIndex::GetAncestor.
std::uint32_t invert_lowest_one(std::uint32_t n) { return n & (n - 1); }

std::uint32_t skip_height(std::uint32_t height) {
  if (height < 2) return 0;
  return (height & 1) ? invert_lowest_one(invert_lowest_one(height - 1)) + 1
                      : invert_lowest_one(height);
}

}  // namespace

BlockTree BlockTree::with_genesis() {
  BlockTree tree;
  Block g;
  g.id = kGenesis;
  g.parent = kNoBlock;
  g.mine_time = 0.0;
  g.miner = kNoNode;
  tree.append(g);
  return tree;
}

const BlockTree::Entry& BlockTree::entry(BlockId id) const {
  if (!contains(id)) {
    throw Error(ErrorCode::UnknownBlock, "block " + std::to_string(id));
  }
  return entries_[id];
}

const Block& BlockTree::at(BlockId id) const { return entry(id).block; }

std::span<const BlockId> BlockTree::children(BlockId id) const {
  return entry(id).children;
}

const Block& BlockTree::append(const Block& block) {
  if (block.id == kNoBlock) {
    throw Error(ErrorCode::UnknownBlock, "reserved id");
  }
  if (contains(block.id)) {
    throw Error(ErrorCode::DuplicateBlock, "block " + std::to_string(block.id));
  }
  Block b = block;
  BlockId skip = kNoBlock;
  if (b.parent == kNoBlock) {
    if (count_ != 0) {
      throw Error(ErrorCode::UnknownParent, "second root " + std::to_string(b.id));
    }
    b.height = 0;
  } else {
    if (!contains(b.parent)) {
      throw Error(ErrorCode::UnknownParent,
                  "parent " + std::to_string(b.parent) + " of " + std::to_string(b.id));
    }
    b.height = entries_[b.parent].block.height + 1;
    skip = ancestor_at_height(b.parent, skip_height(b.height));
  }
  if (b.id >= entries_.size()) entries_.resize(static_cast<std::size_t>(b.id) + 1);
  Entry& e = entries_[b.id];
  e.block = b;
  e.skip = skip;
  e.present = true;
  ++count_;
  if (b.parent == kNoBlock) {
    root_ = b.id;
  } else {
    entries_[b.parent].children.push_back(b.id);
  }
  return e.block;
}

BlockId BlockTree::ancestor_at_height(BlockId id, std::uint32_t height) const {
  const Entry* walk = &entry(id);
  if (height > walk->block.height) {
    throw Error(ErrorCode::ChainTooShort, "ancestor above block");
  }
  std::uint32_t h = walk->block.height;
  while (h > height) {
    std::uint32_t hs = skip_height(h);
    std::uint32_t hs_prev = skip_height(h - 1);
    if (walk->skip != kNoBlock &&
        (hs == height ||
         (hs > height && !(hs_prev < hs - 2 && hs_prev >= height)))) {
      walk = &entries_[walk->skip];
      h = hs;
    } else {
      walk = &entries_[walk->block.parent];
      --h;
    }
  }
  return walk->block.id;
}

std::uint32_t chain_length(const BlockTree& tree, Chain c) {
  return tree.at(c.tip).height + 1;
}

bool is_descendant(const BlockTree& tree, BlockId ancestor, BlockId descendant) {
  const Block& a = tree.at(ancestor);
  const Block& d = tree.at(descendant);
  if (a.height > d.height) return false;
  return tree.ancestor_at_height(descendant, a.height) == ancestor;
}

Chain drop_last(const BlockTree& tree, Chain c, std::uint32_t k) {
  std::uint32_t h = tree.at(c.tip).height;
  if (k >= h) return Chain{tree.ancestor_at_height(c.tip, 0)};
  return Chain{tree.ancestor_at_height(c.tip, h - k)};
}

BlockId block_at_depth(const BlockTree& tree, Chain c, std::uint32_t k) {
  std::uint32_t h = tree.at(c.tip).height;
  if (k > h) {
    throw Error(ErrorCode::ChainTooShort,
                "length " + std::to_string(h + 1) + " depth " + std::to_string(k));
  }
  return tree.ancestor_at_height(c.tip, h - k);
}

bool is_prefix(Chain c1, Chain c2, const BlockTree& tree) {
  return is_descendant(tree, c1.tip, c2.tip);
}

Chain common_prefix(Chain c1, Chain c2, const BlockTree& tree) {
  std::uint32_t h1 = tree.at(c1.tip).height;
  std::uint32_t h2 = tree.at(c2.tip).height;
  std::uint32_t h = std::min(h1, h2);
  BlockId a = tree.ancestor_at_height(c1.tip, h);
  BlockId b = tree.ancestor_at_height(c2.tip, h);
  if (a == b) return Chain{a};
  // Binary search on height: ancestry agreement is monotone.
  std::uint32_t lo = 0, hi = h;  // agree at lo, disagree at hi
  while (hi - lo > 1) {
    std::uint32_t mid = lo + (hi - lo) / 2;
    if (tree.ancestor_at_height(a, mid) == tree.ancestor_at_height(b, mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return Chain{tree.ancestor_at_height(a, lo)};
}

std::vector<BlockId> chain_blocks(const BlockTree& tree, Chain c) {
  const Block* b = &tree.at(c.tip);
  std::vector<BlockId> out(b->height + 1);
  for (;;) {
    out[b->height] = b->id;
    if (b->parent == kNoBlock) break;
    b = &tree.at(b->parent);
  }
  return out;
}

}  // namespace clc
