#pragma once

#include <cstdint>
#include <vector>

#include "clc/types.hpp"

namespace clc {

// A BA value is a chain tip, or kBottom for ⊥.
using Value = BlockId;
inline constexpr Value kBottom = kNoBlock;

enum class VoteKind : std::uint8_t { soft = 0, cert = 1, next = 2 };

struct Vote {
  VoteKind kind = VoteKind::soft;
  Value value = kBottom;
  std::uint32_t iteration = 0;
  std::uint32_t period = 0;
  NodeId voter = kNoNode;

  friend bool operator==(const Vote&, const Vote&) = default;
};

struct Certificate {
  std::uint32_t iteration = 0;
  std::uint32_t period = 0;
  Value value = kBottom;
  std::vector<Vote> votes;  // cert-votes
};

struct Checkpoint {
  std::uint32_t iteration = 0;
  BlockId block = kGenesis;
  SimTime appear_time = 0.0;
};

// Quorum check shared by nodes and the trace auditor.
bool certificate_valid(const Certificate& cert, std::uint32_t quorum);

}  // namespace clc
