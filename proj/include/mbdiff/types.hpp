#pragma once

#include <cstdint>

namespace mbdiff {

using NodeId = std::uint32_t;

inline constexpr NodeId kInvalidNode = 0xFFFFFFFFu;

}  // namespace mbdiff
