#include <doctest.h>

#include <random>

#include "clc/block_tree.hpp"
#include "clc/error.hpp"

using namespace clc;

namespace {

Block blk(BlockId id, BlockId parent) {
  Block b;
  b.id = id;
  b.parent = parent;
  return b;
}

// Random tree with ids 0..n-1, parents drawn from earlier ids.
BlockTree random_tree(std::mt19937_64& rng, std::uint32_t n) {
  BlockTree t = BlockTree::with_genesis();
  for (BlockId id = 1; id < n; ++id) {
    // Bias towards recent blocks so chains get long.
    BlockId lo = id > 8 ? id - 8 : 0;
    t.append(blk(id, lo + static_cast<BlockId>(rng() % (id - lo))));
  }
  return t;
}

std::vector<BlockId> naive_path(const BlockTree& t, BlockId b) {
  std::vector<BlockId> p;
  for (BlockId x = b; x != kNoBlock; x = t.at(x).parent) p.push_back(x);
  return {p.rbegin(), p.rend()};
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("append recomputes heights and indexes children") {
  BlockTree t = BlockTree::with_genesis();
  Block b = blk(1, kGenesis);
  b.height = 99;
  CHECK(t.append(b).height == 1);
  t.append(blk(2, 1));
  t.append(blk(3, 1));
  CHECK(t.at(3).height == 2);
  CHECK(t.children(1).size() == 2);
  CHECK(t.size() == 4);
  CHECK(t.next_id() == 4);
}

TEST_CASE("append errors") {
  BlockTree t = BlockTree::with_genesis();
  CHECK(code_of([&] { t.append(blk(5, 4)); }) == ErrorCode::UnknownParent);
  t.append(blk(1, 0));
  CHECK(code_of([&] { t.append(blk(1, 0)); }) == ErrorCode::DuplicateBlock);
  CHECK(code_of([&] { t.append(blk(7, kNoBlock)); }) == ErrorCode::UnknownParent);
  CHECK(code_of([&] { t.at(42); }) == ErrorCode::UnknownBlock);
}

TEST_CASE("depth helpers on a path") {
  BlockTree t = BlockTree::with_genesis();
  for (BlockId i = 1; i <= 5; ++i) t.append(blk(i, i - 1));
  CHECK(chain_length(t, Chain{5}) == 6);  // genesis included
  CHECK(drop_last(t, Chain{5}, 2).tip == 3);
  CHECK(drop_last(t, Chain{5}, 50).tip == kGenesis);
  CHECK(block_at_depth(t, Chain{5}, 0) == 5);
  CHECK(block_at_depth(t, Chain{5}, 5) == kGenesis);
  CHECK(code_of([&] { block_at_depth(t, Chain{5}, 6); }) == ErrorCode::ChainTooShort);
  CHECK(is_prefix(Chain{2}, Chain{5}, t));
  CHECK_FALSE(is_prefix(Chain{5}, Chain{2}, t));
  CHECK(chain_blocks(t, Chain{3}) == std::vector<BlockId>{0, 1, 2, 3});
}

TEST_CASE("skip-pointer ancestry agrees with a parent walk") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 20; ++round) {
    BlockTree t = random_tree(rng, 400);
    for (int q = 0; q < 300; ++q) {
      BlockId a = static_cast<BlockId>(rng() % 400), b = static_cast<BlockId>(rng() % 400);
      auto pa = naive_path(t, a), pb = naive_path(t, b);
      std::uint32_t h = static_cast<std::uint32_t>(rng() % pa.size());
      CHECK(t.ancestor_at_height(a, h) == pa[h]);
      bool desc = pa.size() <= pb.size() && pb[pa.size() - 1] == a;
      CHECK(is_descendant(t, a, b) == desc);
      std::size_t m = 0;
      while (m < pa.size() && m < pb.size() && pa[m] == pb[m]) ++m;
      CHECK(common_prefix(Chain{a}, Chain{b}, t).tip == pa[m - 1]);
    }
  }
}
