#pragma once

#include <cstdint>
#include <limits>

namespace clc {

using BlockId = std::uint32_t;
using NodeId = std::int32_t;
using SimTime = double;

inline constexpr BlockId kGenesis = 0;
inline constexpr BlockId kNoBlock = std::numeric_limits<BlockId>::max();

// The adversary is a single controller; it owns all adversarial mining
// power and the byzantine checkpointer identities.
inline constexpr NodeId kAdversary = -1;
inline constexpr NodeId kNoNode = -2;

enum class MinerKind : std::uint8_t { honest, adversarial };

}  // namespace clc
